#include "deeppde/tensor.hpp"
