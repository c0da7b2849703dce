#include "mps/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>

namespace mps {

namespace {

// Gauss-Kronrod 7-15 nodes and weights on [-1, 1].
constexpr double kXgk[8] = {
    0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
    0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
    0.2077849550078985, 0.0};
constexpr double kWgk[8] = {
    0.0229353220105292, 0.0630920926299786, 0.1047900103222502,
    0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
    0.2044329400752989, 0.2094821410847278};
constexpr double kWg[4] = {0.1294849661688697, 0.2797053914892767,
                           0.3818300505051189, 0.4179591836734694};

struct Panel {
  double a, b;
  double value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

Panel gk15(const Integrand& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kXgk[i]);
    fv[14 - i] = f(c + h * kXgk[i]);
  }
  fv[7] = f(c);
  double kron = kWgk[7] * fv[7];
  double gauss = kWg[3] * fv[7];
  for (int i = 0; i < 7; ++i) {
    kron += kWgk[i] * (fv[i] + fv[14 - i]);
    if (i % 2 == 1) gauss += kWg[i / 2] * (fv[i] + fv[14 - i]);
  }
  Panel p;
  p.a = a;
  p.b = b;
  p.value = kron * h;
  p.error = std::abs((kron - gauss) * h);
  return p;
}

QuadratureResult adapt(const Integrand& f, const std::vector<double>& edges,
                       double abs_tol, double rel_tol, int max_intervals) {
  std::priority_queue<Panel> heap;
  double total = 0.0, err = 0.0;
  for (size_t i = 0; i + 1 < edges.size(); ++i) {
    Panel p = gk15(f, edges[i], edges[i + 1]);
    total += p.value;
    err += p.error;
    heap.push(p);
  }
  int used = static_cast<int>(edges.size()) - 1;
  while (used < max_intervals) {
    const double goal = std::max(abs_tol, rel_tol * std::abs(total));
    if (err <= goal || heap.empty()) break;
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (mid <= worst.a || mid >= worst.b) continue;  // interval exhausted
    Panel l = gk15(f, worst.a, mid);
    Panel r = gk15(f, mid, worst.b);
    total += l.value + r.value - worst.value;
    err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    ++used;
  }
  QuadratureResult res;
  res.value = total;
  res.error = err;
  res.converged = err <= std::max(abs_tol, rel_tol * std::abs(total));
  return res;
}

}  // namespace

QuadratureResult integrate(const Integrand& f, double a, double b,
                           double abs_tol, double rel_tol,
                           int max_intervals) {
  return adapt(f, {a, b}, abs_tol, rel_tol, max_intervals);
}

QuadratureResult integrate(const Integrand& f, double a, double b,
                           const std::vector<double>& breakpoints,
                           double abs_tol, double rel_tol,
                           int max_intervals) {
  std::vector<double> edges{a};
  std::vector<double> pts = breakpoints;
  std::sort(pts.begin(), pts.end());
  for (double p : pts)
    if (p > a && p < b && p != edges.back()) edges.push_back(p);
  edges.push_back(b);
  return adapt(f, edges, abs_tol, rel_tol, max_intervals);
}

QuadratureResult integrate_to_infinity(const Integrand& f, double a,
                                       double abs_tol, double rel_tol,
                                       int max_intervals) {
  auto g = [&](double u) {
    const double one_minus = 1.0 - u;
    const double t = a + u / one_minus;
    return f(t) / (one_minus * one_minus);
  };
  // Split the mapped interval to seed the adaptive pass near both ends.
  return adapt(g, {0.0, 0.5, 0.9, 0.99, 1.0 - 1e-12}, abs_tol, rel_tol,
               max_intervals);
}

QuadratureResult periodic_average(const Integrand& f, double rel_tol,
                                  int initial_nodes, int max_nodes) {
  int n = initial_nodes;
  double prev = periodic_average_fixed(f, n);
  QuadratureResult res;
  while (n < max_nodes) {
    n *= 2;
    const double cur = periodic_average_fixed(f, n);
    res.value = cur;
    res.error = std::abs(cur - prev);
    if (res.error <= rel_tol * std::max(1.0, std::abs(cur))) {
      res.converged = true;
      return res;
    }
    prev = cur;
  }
  res.converged = false;
  return res;
}

double periodic_average_fixed(const Integrand& f, int nodes) {
  const double step = 2.0 * std::numbers::pi / nodes;
  double sum = 0.0, comp = 0.0;  // Kahan
  for (int i = 0; i < nodes; ++i) {
    const double y = f(i * step) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum / nodes;
}

double unit_sphere_measure(int n) {
  if (n < 0) throw std::invalid_argument("unit_sphere_measure: n < 0");
  const double half = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

}  // namespace mps
