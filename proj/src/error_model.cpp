#include "qbxfds/error_model.hpp"

#include <cmath>

namespace qbxfds {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr int kMinOrder = 2;
constexpr int kMaxOrder = 32;
}  // namespace

ModelConstants measure_constants(const std::vector<ClusterSkeleton>& skeletons,
                                 double alpha, double R_pxy) {
  ModelConstants mc;
  mc.alpha = alpha;
  mc.R_pxy = R_pxy;
  double c0 = 0, c1 = 0;
  for (const auto& s : skeletons) {
    if (s.side == SkelSide::Target) {
      const double a0 =
          s.proxy_weight > 0 ? s.far_weight_norm / s.proxy_weight : 0;
      const double a1 = (1 + s.interp_norm) * s.far_weight_norm;
      c0 = std::max(c0, a0);
      c1 = std::max(c1, a1);
    } else {
      const double b0 = 1.0;
      const double b1 = (1 + s.interp_norm) * s.own_weight_norm;
      c0 = std::max(c0, b0);
      c1 = std::max(c1, b1);
    }
  }
  mc.c0 = c0 > 0 ? c0 : 1.0;
  mc.c1 = c1 > 0 ? c1 : 1.0;
  return mc;
}

double proxy_weight_factor(int dim, long q, double R_pxy) {
  if (q < 1) throw ParameterError("proxy_weight_factor: q >= 1");
  return dim == 2 ? 2 * kPi * R_pxy / q : 4 * kPi * R_pxy * R_pxy / q;
}

double proxy_far_factor(int dim, double alpha, int p, double R_pxy) {
  if (!(alpha > 1)) throw ParameterError("proxy_far_factor: alpha > 1");
  const double tail = std::pow(alpha, -p) / (alpha - 1);
  return dim == 2 ? tail / (2 * kPi) : tail / (4 * kPi * R_pxy);
}

int proxy_order_from_count(int dim, long q) {
  if (q < 1) throw ParameterError("proxy_order_from_count: q >= 1");
  if (dim == 2) return static_cast<int>((q - 1) / 2);
  return sphere_rule_order_for_count(q);
}

long proxy_count_from_order(int dim, int p) {
  if (p < 0) throw ParameterError("proxy_count_from_order: p >= 0");
  if (dim == 2) return 2L * p + 1;
  return static_cast<long>(p + 1) * (2L * p + 1);
}

double model_error(int dim, long q, double alpha, double R_pxy, double eps_id,
                   const ModelConstants& constants, double L_norm,
                   double R_norm) {
  if (!(alpha > 1)) throw ParameterError("model_error: alpha > 1");
  const int p = proxy_order_from_count(dim, q);
  const double pref = 0.5 * (2 + L_norm + R_norm);
  const double id_term =
      (1 + constants.C0 * constants.c0 * proxy_weight_factor(dim, q, R_pxy)) *
      eps_id;
  const double far_term = constants.C1 * constants.c1 *
                          proxy_far_factor(dim, alpha, p, R_pxy);
  return pref * (id_term + far_term);
}

ProxyEstimate estimate_proxy_order(int dim, double eps_id, double alpha,
                                   double R_pxy,
                                   const ModelConstants& constants) {
  if (!(alpha > 1)) throw ParameterError("estimate_proxy_order: alpha > 1");
  const double c0e = constants.C0 * constants.c0;
  const double c1e = constants.C1 * constants.c1;
  // balance the two model terms; the weight factor enters at unit q
  double arg;
  if (dim == 3) {
    arg = (alpha - 1) * 4 * kPi * R_pxy * (1 + 4 * kPi * c0e * R_pxy * R_pxy) /
          c1e * eps_id;
  } else {
    arg = (alpha - 1) * 2 * kPi * (1 + 2 * kPi * c0e * R_pxy) / c1e * eps_id;
  }
  int p;
  if (!(arg > 0)) {
    p = kMaxOrder;
  } else if (arg >= 1) {
    p = kMinOrder;
  } else {
    p = static_cast<int>(std::ceil(-std::log(arg) / std::log(alpha)));
    p = std::clamp(p, kMinOrder, kMaxOrder);
  }
  ProxyEstimate est;
  est.order = p;
  if (dim == 2) {
    est.count = 2L * p + 1;
  } else {
    // target the 2p(p+1) + O(1) design count, rounded up to a realizable
    // product-rule size
    const long target = 2L * p * (p + 1);
    int pr = p;
    while (static_cast<long>(pr + 1) * (2L * pr + 1) < target) ++pr;
    est.count = static_cast<long>(pr + 1) * (2L * pr + 1);
  }
  return est;
}

FitResult fit_constants(const std::vector<FitPoint>& data, int dim, double c0,
                        double c1) {
  if (data.size() < 4)
    throw ParameterError("fit_constants: need at least 4 sweep points");
  const long n = static_cast<long>(data.size());
  VectorXd u(n), v(n), w0(n), y(n);
  for (long i = 0; i < n; ++i) {
    const auto& d = data[i];
    const double pref = 0.5 * (2 + d.L_norm + d.R_norm);
    const int p = proxy_order_from_count(dim, d.q);
    u[i] = pref * d.eps_id * c0 * proxy_weight_factor(dim, d.q, d.R_pxy);
    v[i] = pref * c1 * proxy_far_factor(dim, d.alpha, p, d.R_pxy);
    w0[i] = pref * d.eps_id;
    y[i] = d.measured;
  }

  FitResult fit;
  // regime split under unit constants: which model term dominates
  long n_id = 0, n_far = 0;
  for (long i = 0; i < n; ++i) (u[i] + w0[i] >= v[i] ? n_id : n_far) += 1;
  fit.degenerate = (n_id == 0 || n_far == 0);

  // linear least squares init on y - w0 = C0 u + C1 v
  double suu = 0, svv = 0, suv = 0, syu = 0, syv = 0;
  for (long i = 0; i < n; ++i) {
    const double r = y[i] - w0[i];
    suu += u[i] * u[i];
    svv += v[i] * v[i];
    suv += u[i] * v[i];
    syu += r * u[i];
    syv += r * v[i];
  }
  double C0 = 1, C1 = 1;
  const double det = suu * svv - suv * suv;
  if (!fit.degenerate && std::abs(det) > 1e-300) {
    C0 = (syu * svv - syv * suv) / det;
    C1 = (suu * syv - suv * syu) / det;
  } else if (svv > 0 && n_far > 0) {
    C1 = syv / svv;
  } else if (suu > 0) {
    C0 = syu / suu;
  }
  C0 = std::max(C0, 1e-12);
  C1 = std::max(C1, 1e-12);

  // Gauss-Newton on log residuals
  for (int iter = 0; iter < 200; ++iter) {
    double j11 = 0, j12 = 0, j22 = 0, g1 = 0, g2 = 0;
    for (long i = 0; i < n; ++i) {
      const double model = w0[i] + C0 * u[i] + C1 * v[i];
      if (model <= 0 || y[i] <= 0) continue;
      const double f = std::log(model) - std::log(y[i]);
      const double a = u[i] / model, b = v[i] / model;
      j11 += a * a;
      j12 += a * b;
      j22 += b * b;
      g1 += a * f;
      g2 += b * f;
    }
    const double d = j11 * j22 - j12 * j12;
    double s1, s2;
    if (std::abs(d) > 1e-300) {
      s1 = (g1 * j22 - g2 * j12) / d;
      s2 = (j11 * g2 - j12 * g1) / d;
    } else if (j22 > 0) {
      s1 = 0;
      s2 = g2 / j22;
    } else if (j11 > 0) {
      s1 = g1 / j11;
      s2 = 0;
    } else {
      break;
    }
    const double new0 = std::max(C0 - s1, 1e-12 * C0);
    const double new1 = std::max(C1 - s2, 1e-12 * C1);
    const double rel = std::abs(new0 - C0) / C0 + std::abs(new1 - C1) / C1;
    C0 = new0;
    C1 = new1;
    if (rel < 1e-14) break;
  }

  fit.C0 = C0;
  fit.C1 = C1;
  double res = 0;
  for (long i = 0; i < n; ++i) {
    const double model = w0[i] + C0 * u[i] + C1 * v[i];
    if (model > 0 && y[i] > 0) {
      const double f = std::log(model) - std::log(y[i]);
      res += f * f;
    }
  }
  fit.log_residual = std::sqrt(res / n);
  return fit;
}

Lemma1Result lemma1_check(int dim, const VectorXd& x, const VectorXd& y,
                          const ProxyBall& proxy, int p) {
  const double rx = (x - proxy.center).norm();
  const double ry = (y - proxy.center).norm();
  if (!(ry < proxy.proxy_radius && proxy.proxy_radius < rx))
    throw ParameterError("lemma1_check: require |y-c| < r_pxy < |x-c|");

  const double exact = green(dim, x.data(), y.data());
  double mediated = 0;
  for (long k = 0; k < proxy.points.rows(); ++k) {
    Eigen::RowVectorXd pk = proxy.points.row(k);
    const double pois = poisson_kernel(dim, x.data(), pk.data(),
                                       proxy.center.data(),
                                       proxy.proxy_radius);
    const double ker = green(dim, pk.data(), y.data());
    mediated += pois * proxy.weights[k] * ker;
  }
  if (dim == 2) {
    // exact compensation of the log monopole (see header)
    mediated += -std::log(rx / proxy.proxy_radius) / (2 * kPi);
  }

  Lemma1Result res;
  res.measured = std::abs(exact - mediated);
  const double alpha_y = proxy.proxy_radius / ry;
  res.bound = proxy_far_factor(dim, alpha_y, p, proxy.proxy_radius);
  return res;
}

}  // namespace qbxfds
