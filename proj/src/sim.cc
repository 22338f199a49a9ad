#include "cbfhull/sim.h"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "cbfhull/errors.h"
#include "cbfhull/geometry.h"

namespace cbfhull {

Dynamics::Dynamics(int n, int m, std::vector<QuadFunc> drift,
                   std::vector<QuadFunc> gain)
    : n_(n), m_(m), drift_(std::move(drift)), gain_(std::move(gain)) {
  if (n < 1 || m < 1) throw DimensionMismatch("Dynamics: n, m must be >= 1");
  if (static_cast<int>(drift_.size()) != n ||
      static_cast<int>(gain_.size()) != n * m)
    throw DimensionMismatch("Dynamics: need n drift and n*m gain entries");
  for (const auto& q : drift_)
    if (q.dim() != n) throw DimensionMismatch("Dynamics: entry dimension");
  for (const auto& q : gain_)
    if (q.dim() != n) throw DimensionMismatch("Dynamics: entry dimension");
}

Dynamics Dynamics::Lti(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.cols());
  if (a.cols() != n || b.rows() != n)
    throw DimensionMismatch("Lti: A must be n x n and B n x m");
  std::vector<QuadFunc> drift, gain;
  for (int i = 0; i < n; ++i) drift.push_back(QuadFunc::Affine(a.row(i), 0.0));
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < m; ++k) gain.push_back(QuadFunc::Constant(n, b(i, k)));
  return Dynamics(n, m, std::move(drift), std::move(gain));
}

Eigen::VectorXd Dynamics::F(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(n_);
  for (int i = 0; i < n_; ++i) out(i) = drift_[i](x);
  return out;
}

Eigen::MatrixXd Dynamics::G(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out(n_, m_);
  for (int i = 0; i < n_; ++i)
    for (int k = 0; k < m_; ++k) out(i, k) = gain_[i * m_ + k](x);
  return out;
}

Dynamics ThreeRoom(const ThreeRoomParams& p) {
  constexpr int n = 3;
  std::vector<QuadFunc> drift, gain;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    c((i + 1) % n) += p.a;
    c((i + n - 1) % n) += p.a;
    c(i) += -2 * p.a - p.b;
    drift.push_back(QuadFunc::Affine(c, p.b * p.t_e));
    for (int k = 0; k < n; ++k) {
      Eigen::VectorXd gk = Eigen::VectorXd::Zero(n);
      double d = 0.0;
      if (k == i) {
        gk(i) = -p.c;
        d = p.c * p.t_h;
      }
      gain.push_back(QuadFunc::Affine(gk, d));
    }
  }
  return Dynamics(n, n, std::move(drift), std::move(gain));
}

StackedMap BuildFromDynamics(const Dynamics& dyn,
                             const std::vector<AffineCbf>& cbfs) {
  const int n = dyn.n();
  const int m = dyn.m();
  if (cbfs.empty()) throw InvalidArgument("BuildFromDynamics: no CBFs");
  std::vector<QuadFunc> psi, delta;
  for (const auto& h : cbfs) {
    if (h.a.size() != n) throw DimensionMismatch("CBF gradient dimension");
    if (h.kappa < 0) throw InvalidArgument("kappa must be nonnegative");
    for (int k = 0; k < m; ++k) {
      QuadFunc e = QuadFunc::Zero(n);
      for (int i = 0; i < n; ++i) e = e + dyn.gain(i, k) * h.a(i);
      psi.push_back(e);
    }
    QuadFunc d = QuadFunc::Affine(h.kappa * h.a, h.kappa * h.b);
    for (int i = 0; i < n; ++i) d = d + dyn.drift(i) * h.a(i);
    delta.push_back(d);
  }
  return StackedMap(n, m, static_cast<int>(cbfs.size()), std::move(psi),
                    std::move(delta));
}

Eigen::VectorXd Rk4Step(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& rhs,
    const Eigen::VectorXd& x, double dt) {
  const Eigen::VectorXd k1 = rhs(x);
  const Eigen::VectorXd k2 = rhs(x + 0.5 * dt * k1);
  const Eigen::VectorXd k3 = rhs(x + 0.5 * dt * k2);
  const Eigen::VectorXd k4 = rhs(x + dt * k3);
  return x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

namespace {

Eigen::VectorXd Barriers(const std::vector<AffineCbf>& cbfs,
                         const Eigen::VectorXd& x) {
  Eigen::VectorXd h(static_cast<Eigen::Index>(cbfs.size()));
  for (std::size_t i = 0; i < cbfs.size(); ++i) h(i) = cbfs[i](x);
  return h;
}

}  // namespace

Trajectory Integrate(const Dynamics& dyn, const Controller& controller,
                     const Eigen::VectorXd& x0, double horizon, double dt,
                     const std::vector<AffineCbf>& cbfs) {
  if (!(dt > 0) || horizon < dt)
    throw InvalidArgument("Integrate: need dt > 0 and T >= dt");
  if (x0.size() != dyn.n()) throw DimensionMismatch("Integrate: x0 dimension");
  const int steps = static_cast<int>(std::llround(horizon / dt));
  Trajectory tr;
  Eigen::VectorXd x = x0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    ControlAction a;
    try {
      a = controller(t, x);
      if (a.u.size() != dyn.m())
        throw DimensionMismatch("controller returned wrong input size");
    } catch (const std::exception& e) {
      tr.times.push_back(t);
      tr.states.push_back(x);
      tr.inputs.push_back(Eigen::VectorXd::Constant(
          dyn.m(), std::numeric_limits<double>::quiet_NaN()));
      tr.h.push_back(Barriers(cbfs, x));
      tr.status.push_back("failed");
      tr.failed = true;
      tr.failure_step = k;
      tr.failure = e.what();
      return tr;
    }
    tr.times.push_back(t);
    tr.states.push_back(x);
    tr.inputs.push_back(a.u);
    tr.h.push_back(Barriers(cbfs, x));
    tr.status.push_back(a.status);
    if (k == steps) break;
    const Eigen::VectorXd u = a.u;
    x = Rk4Step([&](const Eigen::VectorXd& z) { return dyn(z, u); }, x, dt);
  }
  return tr;
}

std::vector<Trajectory> BatchIntegrate(const Dynamics& dyn,
                                       const Controller& controller,
                                       const std::vector<Eigen::VectorXd>& x0s,
                                       double horizon, double dt,
                                       const std::vector<AffineCbf>& cbfs,
                                       bool parallel) {
  const int count = static_cast<int>(x0s.size());
  std::vector<Trajectory> out(count);
  std::vector<std::string> errors(count);
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < count; ++i) {
    try {
      out[i] = Integrate(dyn, controller, x0s[i], horizon, dt, cbfs);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (const auto& e : errors)
    if (!e.empty()) throw InvalidArgument(e);
  return out;
}

double SafetyMargin(const Trajectory& traj,
                    const std::vector<AffineCbf>& cbfs) {
  if (traj.states.empty()) throw InvalidArgument("empty trajectory");
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& x : traj.states)
    for (const auto& h : cbfs) worst = std::min(worst, h(x));
  return worst;
}

double SafetyMargin(const std::vector<Trajectory>& trajs,
                    const std::vector<AffineCbf>& cbfs) {
  double worst = std::numeric_limits<double>::infinity();
  for (const auto& t : trajs) worst = std::min(worst, SafetyMargin(t, cbfs));
  return worst;
}

std::vector<Eigen::VectorXd> RandomStates(const Eigen::VectorXd& lo,
                                          const Eigen::VectorXd& hi, int count,
                                          std::uint64_t seed) {
  if (lo.size() != hi.size()) throw DimensionMismatch("RandomStates: bounds");
  std::mt19937_64 rng(seed);
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < count; ++i) {
    Eigen::VectorXd x(lo.size());
    for (Eigen::Index k = 0; k < lo.size(); ++k)
      x(k) = std::uniform_real_distribution<double>(lo(k), hi(k))(rng);
    out.push_back(x);
  }
  return out;
}

std::vector<Eigen::VectorXd> RandomStates(const Hull& hull, int count,
                                          std::uint64_t seed) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& s : geometry::RandomHullSamples(hull, count, seed))
    out.push_back(s.x);
  return out;
}

std::string TrajectoryCsv(const Trajectory& traj) {
  std::ostringstream os;
  os.precision(10);
  if (traj.states.empty()) return "";
  const auto n = traj.states.front().size();
  const auto m = traj.inputs.front().size();
  const auto p = traj.h.front().size();
  os << "t";
  for (Eigen::Index i = 0; i < n; ++i) os << ",x" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) os << ",u" << i + 1;
  for (Eigen::Index i = 0; i < p; ++i) os << ",h" << i + 1;
  os << ",status\n";
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    os << traj.times[k];
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << traj.states[k](i);
    for (Eigen::Index i = 0; i < m; ++i) os << ',' << traj.inputs[k](i);
    for (Eigen::Index i = 0; i < p; ++i) os << ',' << traj.h[k](i);
    os << ',' << traj.status[k] << '\n';
  }
  return os.str();
}

}  // namespace cbfhull
