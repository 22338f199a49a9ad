#include "cbfhull/controllers.h"

#include "cbfhull/errors.h"
#include "cbfhull/qp.h"

namespace cbfhull {

Controller ClippedAffineController(DesiredInput law, Box bounds) {
  return [law = std::move(law), bounds = std::move(bounds)](
             double, const Eigen::VectorXd& x) {
    ControlAction a;
    const Eigen::VectorXd raw = law(x);
    a.u = raw.cwiseMax(bounds.lower).cwiseMin(bounds.upper);
    if ((a.u - raw).cwiseAbs().maxCoeff() > 0.0) a.status = "clipped";
    return a;
  };
}

Controller ConstantController(Eigen::VectorXd u) {
  return [u = std::move(u)](double, const Eigen::VectorXd&) {
    return ControlAction{u, "ok"};
  };
}

Controller QpFilterController(std::shared_ptr<const StackedMap> map,
                              std::shared_ptr<const InputSet> input_set,
                              DesiredInput u_des, ToleranceConfig tol) {
  return [map, input_set, u_des = std::move(u_des), tol](
             double, const Eigen::VectorXd& x) {
    const StackedValue v = map->Eval(x);
    const QpSolution s = SolveQpProjection(u_des(x), v.psi, v.delta,
                                           *input_set, tol);
    return ControlAction{s.u, s.weakly_active ? "weak" : "ok"};
  };
}

Controller ExplicitFilterController(
    std::shared_ptr<const ExplicitController> controller,
    std::shared_ptr<const StackedMap> map,
    std::shared_ptr<const InputSet> input_set, DesiredInput u_des,
    ExplicitFallback fallback, ToleranceConfig tol) {
  return [=](double, const Eigen::VectorXd& x) {
    try {
      return ControlAction{EvalExplicit(*controller, x), "ok"};
    } catch (const OutsideHull&) {
      if (fallback == ExplicitFallback::kThrow) throw;
    }
    const StackedValue v = map->Eval(x);
    const QpSolution s =
        SolveQpProjection(u_des(x), v.psi, v.delta, *input_set, tol);
    return ControlAction{s.u, "fallback"};
  };
}

}  // namespace cbfhull
