#pragma once

#include <algorithm>
#include <span>
#include <vector>

namespace qrv::detail {

// Sorted copy of a sliding window. Each slide costs O(m) element moves,
// cheap for the block lengths used in practice.
class SortedWindow {
 public:
  explicit SortedWindow(std::span<const double> initial) : v_(initial.begin(), initial.end()) {
    std::sort(v_.begin(), v_.end());
  }

  void slide(double out, double in) {
    auto it = std::lower_bound(v_.begin(), v_.end(), out);
    const auto pos = std::upper_bound(v_.begin(), v_.end(), in);
    if (pos <= it) {
      std::move_backward(pos, it, it + 1);
      *pos = in;
    } else {
      std::move(it + 1, pos, it);
      *(pos - 1) = in;
    }
  }

  // rank is 1-based.
  [[nodiscard]] double at(int rank) const { return v_[static_cast<std::size_t>(rank - 1)]; }
  [[nodiscard]] std::size_t size() const noexcept { return v_.size(); }

 private:
  std::vector<double> v_;
};

}  // namespace qrv::detail
