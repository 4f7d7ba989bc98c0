#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace evosync {

// Block structure of a flat vector that concatenates one block per population.
class Layout {
 public:
  Layout() = default;
  explicit Layout(std::span<const std::size_t> block_sizes);

  std::size_t blocks() const { return offsets_.size() - 1; }
  std::size_t size() const { return offsets_.back(); }
  std::size_t offset(std::size_t p) const { return offsets_[p]; }
  std::size_t block_size(std::size_t p) const { return offsets_[p + 1] - offsets_[p]; }

  bool operator==(const Layout&) const = default;

 private:
  std::vector<std::size_t> offsets_{0};
};

class BlockVector {
 public:
  BlockVector() = default;
  explicit BlockVector(Layout layout, double fill = 0.0);
  BlockVector(Layout layout, std::vector<double> values);

  const Layout& layout() const { return layout_; }
  std::size_t populations() const { return layout_.blocks(); }
  std::size_t size() const { return values_.size(); }

  std::span<double> block(std::size_t p) {
    return {values_.data() + layout_.offset(p), layout_.block_size(p)};
  }
  std::span<const double> block(std::size_t p) const {
    return {values_.data() + layout_.offset(p), layout_.block_size(p)};
  }
  double& operator()(std::size_t p, std::size_t m) { return values_[layout_.offset(p) + m]; }
  double operator()(std::size_t p, std::size_t m) const { return values_[layout_.offset(p) + m]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& raw() const { return values_; }

  // Largest absolute componentwise difference; layouts must match.
  double max_abs_diff(const BlockVector& other) const;
  double max_abs() const;

  bool operator==(const BlockVector&) const = default;

 protected:
  Layout layout_;
  std::vector<double> values_;
};

// A point of the product of per-population simplices.
class SocialState : public BlockVector {
 public:
  using BlockVector::BlockVector;

  static SocialState from_blocks(const std::vector<std::vector<double>>& blocks);

  // Nonnegative entries and every block summing to one within `tol`.
  bool on_simplex(double tol = 1e-9) const;
  // Throws ValidationError naming the first offending population.
  void validate(double tol = 1e-9) const;
};

// Time derivative of a SocialState, same block structure.
class VectorField : public BlockVector {
 public:
  using BlockVector::BlockVector;

  // Σ_m v^p_m for population p.
  double block_sum(std::size_t p) const;
};

struct PayoffTable {
  BlockVector payoff;
  std::vector<double> average;

  // max_m π^p_m − min_m π^p_m over strategies whose share exceeds `min_share`.
  double spread(const SocialState& state, std::size_t p, double min_share) const;
};

}  // namespace evosync
