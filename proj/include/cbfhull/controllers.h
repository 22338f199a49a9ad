#pragma once

#include <memory>

#include <Eigen/Dense>

#include "cbfhull/explicit_filter.h"
#include "cbfhull/problem_model.h"
#include "cbfhull/sim.h"
#include "cbfhull/tolerances.h"

namespace cbfhull {

// Affine law clipped to the input box; status "clipped" when clipping acts.
Controller ClippedAffineController(DesiredInput law, Box bounds);

Controller ConstantController(Eigen::VectorXd u);

// Online filter QP; InfeasibleQP propagates as a controller failure.
Controller QpFilterController(std::shared_ptr<const StackedMap> map,
                              std::shared_ptr<const InputSet> input_set,
                              DesiredInput u_des, ToleranceConfig tol = {});

enum class ExplicitFallback { kThrow, kOnlineQp };

// Explicit piecewise-affine filter. Outside the hull either fails or solves
// the online QP (status "fallback").
Controller ExplicitFilterController(
    std::shared_ptr<const ExplicitController> controller,
    std::shared_ptr<const StackedMap> map,
    std::shared_ptr<const InputSet> input_set, DesiredInput u_des,
    ExplicitFallback fallback = ExplicitFallback::kThrow,
    ToleranceConfig tol = {});

}  // namespace cbfhull
