#pragma once

#include "gbsplit/convex_body.hpp"
#include "gbsplit/cutoff.hpp"
#include "gbsplit/decomposition.hpp"

#include <memory>

namespace gbsplit::testing {

// sigma(x) = level for all x; support_end is irrelevant for a constant.
class ConstantCutoff final : public Cutoff {
 public:
  explicit ConstantCutoff(double level) : level_(level) {}
  double value(double) const override { return level_; }
  CutoffDerivatives derivatives(double) const override { return {}; }
  double support_end() const override { return 1.0; }

 private:
  double level_;
};

// A concave bump that ignores the derivative constraints: sigma rises after
// the boundary, so weight_good stops being quasi-concave.
class BumpCutoff final : public Cutoff {
 public:
  explicit BumpCutoff(double height) : height_(height) {}
  double value(double x) const override { return x < 2.0 ? height_ * x * (2.0 - x) : 0.0; }
  CutoffDerivatives derivatives(double x) const override {
    return x < 2.0 ? CutoffDerivatives{height_ * (2.0 - 2.0 * x), -2.0 * height_} : CutoffDerivatives{};
  }
  double support_end() const override { return 2.0; }

 private:
  double height_;
};

inline constexpr double kReferenceRadius = 3.3682141752187267;  // sqrt of the chi2(3) 0.99-quantile

inline BodyPtr reference_ball() { return std::make_shared<L2Ball>(3, kReferenceRadius); }

inline GoodBadSplit reference_split() { return GoodBadSplit(reference_ball(), 0.01, 2.0); }

}  // namespace gbsplit::testing
