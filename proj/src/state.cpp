#include "evosync/state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "evosync/errors.hpp"

namespace evosync {

Layout::Layout(std::span<const std::size_t> block_sizes) {
  offsets_.reserve(block_sizes.size() + 1);
  for (auto n : block_sizes) offsets_.push_back(offsets_.back() + n);
}

BlockVector::BlockVector(Layout layout, double fill)
    : layout_(std::move(layout)), values_(layout_.size(), fill) {}

BlockVector::BlockVector(Layout layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
  if (values_.size() != layout_.size()) {
    throw StructuralError("block vector has " + std::to_string(values_.size()) +
                          " entries, layout expects " + std::to_string(layout_.size()));
  }
}

double BlockVector::max_abs_diff(const BlockVector& other) const {
  if (!(layout_ == other.layout_)) throw StructuralError("layout mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    d = std::max(d, std::abs(values_[i] - other.values_[i]));
  }
  return d;
}

double BlockVector::max_abs() const {
  double d = 0.0;
  for (double v : values_) d = std::max(d, std::abs(v));
  return d;
}

SocialState SocialState::from_blocks(const std::vector<std::vector<double>>& blocks) {
  std::vector<std::size_t> sizes;
  std::vector<double> flat;
  for (const auto& b : blocks) {
    sizes.push_back(b.size());
    flat.insert(flat.end(), b.begin(), b.end());
  }
  return SocialState(Layout(sizes), std::move(flat));
}

bool SocialState::on_simplex(double tol) const {
  for (std::size_t p = 0; p < populations(); ++p) {
    double sum = 0.0;
    for (double x : block(p)) {
      if (!(x >= 0.0)) return false;
      sum += x;
    }
    if (std::abs(sum - 1.0) > tol) return false;
  }
  return true;
}

void SocialState::validate(double tol) const {
  for (std::size_t p = 0; p < populations(); ++p) {
    double sum = 0.0;
    const auto b = block(p);
    if (b.empty()) throw ValidationError("population " + std::to_string(p) + " has no strategies");
    for (std::size_t m = 0; m < b.size(); ++m) {
      if (!(b[m] >= 0.0)) {
        throw ValidationError("population " + std::to_string(p) + " strategy " +
                              std::to_string(m) + " has negative or non-finite share");
      }
      sum += b[m];
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ValidationError("population " + std::to_string(p) + " shares sum to " +
                            std::to_string(sum) + ", expected 1");
    }
  }
}

double VectorField::block_sum(std::size_t p) const {
  double s = 0.0;
  for (double v : block(p)) s += v;
  return s;
}

double PayoffTable::spread(const SocialState& state, std::size_t p, double min_share) const {
  const auto pi = payoff.block(p);
  const auto x = state.block(p);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t m = 0; m < pi.size(); ++m) {
    if (x[m] > min_share) {
      lo = std::min(lo, pi[m]);
      hi = std::max(hi, pi[m]);
    }
  }
  if (lo > hi) {
    // every share is at or below the threshold; fall back to all strategies
    for (double v : pi) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  return hi - lo;
}

}  // namespace evosync
