#pragma once

#include <string>

#include "deeppde/train.hpp"

namespace deeppde {

/// Dataset file: magic "NOPDS1", version u32, dims u32, extents (u32 each),
/// sample count u32, then all inputs and all targets as little-endian f64
/// arrays, then a length-prefixed UTF-8 metadata blob (JSON; carries the
/// domain lengths and generation parameters).
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

/// Checkpoint file: magic "NOPCK1", length-prefixed UTF-8 descriptor blob
/// (JSON: architecture + metadata), then u64 count and f64 parameters.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace deeppde
