#ifndef EPF_CORE_SCENARIOS_HPP
#define EPF_CORE_SCENARIOS_HPP

#include <cstdint>
#include <utility>
#include <vector>

#include "core/detailed.hpp"
#include "core/grid.hpp"

namespace epf
{

/// Uniform sampling box over a detailed model's parameters and seed state.
/// Scenarios start with population N, a seeded exposed count drawn from
/// e0_bounds and a seeded infectious count drawn from i0_bounds (placed in
/// the first infectious compartment so the collapsed I is positive from t=0);
/// everyone else is susceptible.
struct ParameterBox
{
    DetailedModel model = DetailedModel::SEI5CHRD;
    std::vector<std::pair<double, double>> bounds; // per parameter, model order
    double population = 0.0;
    std::pair<double, double> e0_bounds{0.0, 0.0};
    std::pair<double, double> i0_bounds{0.0, 0.0};

    void validate() const;
};

/// Training set of collapsed rate rows: betas and gammas are K x Q, sharing
/// one grid over [0, T+tau].
struct ScenarioSet
{
    TimeGrid grid;
    std::vector<std::vector<double>> betas;
    std::vector<std::vector<double>> gammas;
    std::vector<DetailedParams> provenance;
    int dropped = 0; // scenarios discarded for collapse degeneracy

    int count() const
    {
        return static_cast<int>(betas.size());
    }
};

/// K independent uniform draws from the box. The SEI5CHRD symptom-severity
/// split samples p_ps and p_ms freely and takes p_ss = 1 - p_ps - p_ms,
/// redrawing until p_ss falls inside its own bounds.
std::vector<DetailedParams> sample_parameters(const ParameterBox& box, int count, std::uint64_t seed);

/// Simulates each parameter vector over the grid, collapses, and recovers the
/// exact-fit rates (exact right-hand-side derivatives). Scenarios whose
/// collapsed I drops below 1e-9 N anywhere are dropped and counted.
ScenarioSet build_training_set(const std::vector<DetailedParams>& params, const TimeGrid& grid, int jobs = 1,
                               double substep = 0.1);

/// Appends the rows of `extra` to `base` (grids must match).
ScenarioSet concatenate(const ScenarioSet& base, const ScenarioSet& extra);

} // namespace epf

#endif // EPF_CORE_SCENARIOS_HPP
