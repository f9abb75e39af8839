#pragma once

#include "laa/contention.hpp"
#include "laa/genfun.hpp"
#include "laa/scenario.hpp"

namespace laa {

/// Conditional PGF of the backoff/collision time of a packet that is
/// eventually sent collision-free (i collisions, i < K_L).
GenFun t1_hat(const SystemParams& params, const ContentionPoint& cp, const GenFun& slot);

/// PGF of the backoff/collision time of a packet dropped after K_L collisions.
GenFun t2_hat(const SystemParams& params, const ContentionPoint& cp, const GenFun& slot);

/// PGF of the OFF period between two consecutive successful deliveries.
/// Throws DomainError where the geometric series diverges.
GenFun t3_hat(const SystemParams& params, const ContentionPoint& cp, const GenFun& slot,
              double per);
GenFun t3_hat(const SystemParams& params, const ContentionPoint& cp, const GenFun& slot);

/// F(x) = log t3(e^x) + x T_f and its derivative; x is per microsecond.
Dual big_f(double x, const GenFun& t3, const SystemParams& params);

/// Everything needed to evaluate the ON/OFF service transforms of one user:
/// slot PGF, t1, t2, t3 and the convergence radius of t3.
class ServiceModel {
 public:
  ServiceModel(const SystemParams& params, const ContentionPoint& cp, double per);
  ServiceModel(const SystemParams& params, const ContentionPoint& cp)
      : ServiceModel(params, cp, params.per) {}

  const SystemParams& params() const { return params_; }
  const ContentionPoint& contention() const { return cp_; }
  double per() const { return per_; }
  double t_f_us() const { return params_.laa_success_us(); }
  /// p_L^{K_L}.
  double drop_probability() const { return drop_; }

  const SlotDistribution& slots() const { return slots_; }
  const GenFun& slot() const { return slot_; }
  const GenFun& t1() const { return t1_; }
  const GenFun& t2() const { return t2_; }
  const GenFun& t3() const { return t3_; }

  /// 1 - q t2(z) - per (1-q) t1(z) z^{T_f}; t3 is finite where this is positive.
  Dual t3_denominator(const Dual& z) const;
  bool in_domain(double x) const;

  /// sup { log z : t3 denominator > 0 }, +inf when the series never diverges.
  double x_max() const { return x_max_; }

  Dual big_f(double x) const;
  double mean_t3_us() const;

 private:
  double compute_x_max() const;

  SystemParams params_;
  ContentionPoint cp_;
  double per_;
  double drop_;
  SlotDistribution slots_;
  GenFun slot_;
  GenFun t1_;
  GenFun t2_;
  GenFun t3_;
  double x_max_;
};

}  // namespace laa
