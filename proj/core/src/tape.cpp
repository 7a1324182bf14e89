#include "deeppde/tape.hpp"

namespace deeppde {

void Tape::gradient(Var output, std::span<const Var> wrt, std::span<double> grad) {
  check_owns(output);
  for (const Var& w : wrt) check_owns(w);
  if (grad.size() != wrt.size()) throw ConfigError("Tape::gradient: bad output span");

  const std::int32_t n = static_cast<std::int32_t>(nodes_.size());
  adj_.assign(n, 0.0);
  adj_[output.idx] = 1.0;
  for (std::int32_t i = output.idx; i >= 0; --i) {
    const double w = adj_[i];
    if (w == 0.0) continue;
    const Node& nd = nodes_[i];
    if (nd.a >= 0) adj_[nd.a] += w * nd.da;
    if (nd.b >= 0) adj_[nd.b] += w * nd.db;
  }
  for (std::size_t k = 0; k < wrt.size(); ++k) grad[k] = adj_[wrt[k].idx];
}

std::vector<double> Tape::gradient(Var output, std::span<const Var> wrt) {
  std::vector<double> g(wrt.size());
  gradient(output, wrt, g);
  return g;
}

void Tape::gradient_with_hv(Var output, std::span<const Var> wrt,
                            std::span<double> grad, std::span<double> hv) {
  if (!tangents_) throw ConfigError("Tape::gradient_with_hv: tangent mode disabled");
  check_owns(output);
  for (const Var& w : wrt) check_owns(w);

  const std::int32_t n = static_cast<std::int32_t>(nodes_.size());
  adj_.assign(n, 0.0);
  adjdot_.assign(n, 0.0);
  adj_[output.idx] = 1.0;
  for (std::int32_t i = output.idx; i >= 0; --i) {
    const double w = adj_[i];
    const double wd = adjdot_[i];
    if (w == 0.0 && wd == 0.0) continue;
    const Node& nd = nodes_[i];
    if (nd.a >= 0) {
      adj_[nd.a] += w * nd.da;
      adjdot_[nd.a] += wd * nd.da + w * dadot_[i];
    }
    if (nd.b >= 0) {
      adj_[nd.b] += w * nd.db;
      adjdot_[nd.b] += wd * nd.db + w * dbdot_[i];
    }
  }
  for (std::size_t k = 0; k < wrt.size(); ++k) {
    grad[k] = adj_[wrt[k].idx];
    hv[k] = adjdot_[wrt[k].idx];
  }
}

}  // namespace deeppde
