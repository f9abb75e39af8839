#include "laa/intervals.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "laa/errors.hpp"

namespace laa {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<GenFun> stage_backoffs(const SystemParams& params) {
  std::vector<GenFun> etas;
  for (int j = 0; j < params.k_retry_laa; ++j) etas.push_back(eta_hat(j, params));
  return etas;
}

void check_collision_prob(const ContentionPoint& cp) {
  if (!(cp.p_laa >= 0.0 && cp.p_laa < 1.0)) {
    throw DomainError("interval transforms need 0 <= p_L < 1, got " + std::to_string(cp.p_laa));
  }
}

Dual t3_denominator_impl(const Dual& t1, const Dual& t2, const Dual& z, double drop, double per,
                         double t_f) {
  Dual den{1.0, 0.0};
  if (drop > 0.0) den = den - drop * t2;
  if (per > 0.0) den = den - (per * (1.0 - drop)) * (t1 * pow(z, t_f));
  return den;
}

}  // namespace

GenFun t1_hat(const SystemParams& params, const ContentionPoint& cp, const GenFun& slot) {
  check_collision_prob(cp);
  const int k = params.k_retry_laa;
  const double p = cp.p_laa;
  const double t_c = params.laa_collision_us();
  const double delivered = 1.0 - std::pow(p, k);
  return GenFun("t1", [etas = stage_backoffs(params), slot, k, p, t_c, delivered](const Dual& z) {
    const Dual y = slot(z);
    Dual prod{1.0, 0.0};
    Dual sum{0.0, 0.0};
    double weight = 1.0 - p;  // (1 - p) p^i
    for (int i = 0; i < k; ++i) {
      prod = prod * etas[static_cast<std::size_t>(i)](y);
      if (weight > 0.0) sum = sum + weight * (pow(z, i * t_c) * prod);
      weight *= p;
    }
    return (1.0 / delivered) * sum;
  });
}

GenFun t2_hat(const SystemParams& params, const ContentionPoint& cp, const GenFun& slot) {
  check_collision_prob(cp);
  const int k = params.k_retry_laa;
  const double t_c = params.laa_collision_us();
  return GenFun("t2", [etas = stage_backoffs(params), slot, k, t_c](const Dual& z) {
    const Dual y = slot(z);
    Dual prod = pow(z, k * t_c);
    for (const GenFun& eta : etas) prod = prod * eta(y);
    return prod;
  });
}

GenFun t3_hat(const SystemParams& params, const ContentionPoint& cp, const GenFun& slot,
              double per) {
  if (!(per >= 0.0 && per < 1.0)) throw DomainError("t3_hat: packet error rate outside [0, 1)");
  const double drop = std::pow(cp.p_laa, params.k_retry_laa);
  const double t_f = params.laa_success_us();
  return GenFun("t3", [t1 = t1_hat(params, cp, slot), t2 = t2_hat(params, cp, slot), drop, per,
                       t_f](const Dual& z) {
    const Dual a = t1(z);
    const Dual b = drop > 0.0 ? t2(z) : Dual{0.0, 0.0};
    const Dual den = t3_denominator_impl(a, b, z, drop, per, t_f);
    if (!(den.value > 0.0) || !std::isfinite(den.value)) {
      std::ostringstream os;
      os.precision(17);
      os << "t3: geometric series diverges at z=" << z.value << " (denominator " << den.value
         << ")";
      throw DomainError(os.str());
    }
    return ((1.0 - per) * (1.0 - drop)) * a / den;
  });
}

GenFun t3_hat(const SystemParams& params, const ContentionPoint& cp, const GenFun& slot) {
  return t3_hat(params, cp, slot, params.per);
}

Dual big_f(double x, const GenFun& t3, const SystemParams& params) {
  const double ex = std::exp(x);
  const Dual t = t3(Dual{ex, ex});
  return {std::log(t.value) + x * params.laa_success_us(),
          t.slope / t.value + params.laa_success_us()};
}

ServiceModel::ServiceModel(const SystemParams& params, const ContentionPoint& cp, double per)
    : params_(params),
      cp_(cp),
      per_(per),
      drop_(std::pow(cp.p_laa, params.k_retry_laa)),
      slots_(slot_distribution(cp, params)),
      slot_(slot_pgf(slots_)),
      t1_(t1_hat(params, cp, slot_)),
      t2_(t2_hat(params, cp, slot_)),
      t3_(t3_hat(params, cp, slot_, per)),
      x_max_(compute_x_max()) {}

Dual ServiceModel::t3_denominator(const Dual& z) const {
  const Dual a = per_ > 0.0 ? t1_(z) : Dual{0.0, 0.0};
  const Dual b = drop_ > 0.0 ? t2_(z) : Dual{0.0, 0.0};
  return t3_denominator_impl(a, b, z, drop_, per_, t_f_us());
}

bool ServiceModel::in_domain(double x) const {
  if (x > x_max_) return false;
  const double den = t3_denominator(Dual::constant(std::exp(x))).value;
  return std::isfinite(den) && den > 0.0;
}

double ServiceModel::compute_x_max() const {
  if (drop_ == 0.0 && per_ == 0.0) return kInf;
  auto ok = [this](double x) {
    const double den = t3_denominator(Dual::constant(std::exp(x))).value;
    return std::isfinite(den) && den > 0.0;
  };
  double lo = 0.0;
  double hi = 1e-9;
  while (ok(hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > 700.0) return kInf;
  }
  for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (ok(mid) ? lo : hi) = mid;
  }
  return lo;
}

Dual ServiceModel::big_f(double x) const { return laa::big_f(x, t3_, params_); }

double ServiceModel::mean_t3_us() const { return t3_.derivative(1.0); }

}  // namespace laa
