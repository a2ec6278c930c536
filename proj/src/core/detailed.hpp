#ifndef EPF_CORE_DETAILED_HPP
#define EPF_CORE_DETAILED_HPP

#include <string>
#include <vector>

#include "core/grid.hpp"

namespace epf
{

enum class DetailedModel
{
    SEI5CHRD,
    SE2IUR,
};

std::string model_name(DetailedModel model);
DetailedModel model_from_name(const std::string& name);

/// Compartment indices of the SEI5CHRD model (11 compartments).
namespace sei5chrd
{
enum Compartment
{
    S = 0,
    E,
    Ip,  // pre-symptomatic
    Ia,  // asymptomatic
    Ips, // paucisymptomatic
    Ims, // mild symptoms
    Iss, // severe symptoms
    C,   // intensive care
    H,   // hospitalized (non-ICU)
    R,
    D,
    Count
};
enum Param
{
    beta_p = 0,
    beta_a,
    beta_ps,
    beta_ms,
    beta_ss,
    beta_H,
    beta_C,
    eps,
    mu_p,
    p_a,
    mu,
    p_ps,
    p_ms,
    p_ss,
    p_C,
    lambda_CR,
    lambda_CD,
    lambda_HR,
    lambda_HD,
    ParamCount
};
const std::vector<std::string>& param_names();
} // namespace sei5chrd

/// Compartment indices of the SE2IUR model (6 state variables).
namespace se2iur
{
enum Compartment
{
    S = 0,
    E1,
    E2,
    I, // reported infectious
    U, // unreported infectious
    R,
    Count
};
enum Param
{
    beta = 0,
    delta,
    sigma,
    nu,
    gamma1,
    gamma2,
    ParamCount
};
const std::vector<std::string>& param_names();
} // namespace se2iur

int compartment_count(DetailedModel model);
int param_count(DetailedModel model);
const std::vector<std::string>& param_names(DetailedModel model);

/// One parameter vector plus initial state for a detailed model.
struct DetailedParams
{
    DetailedModel model = DetailedModel::SEI5CHRD;
    std::vector<double> mu; // ordered per the model's Param enum
    std::vector<double> u0; // ordered per the model's Compartment enum

    double population() const;
    void validate() const;
};

/// Dense trajectory of all compartments: comp[c][k] is compartment c at grid
/// point k.
struct DetailedTrajectory
{
    DetailedModel model = DetailedModel::SEI5CHRD;
    TimeGrid grid;
    std::vector<std::vector<double>> comp;
    double population = 0.0;
};

/// Evaluates the model right-hand side at one state. Exposed so that collapse
/// can use exact derivatives instead of finite differences.
void detailed_rhs(DetailedModel model, const std::vector<double>& mu, const std::vector<double>& state,
                  std::vector<double>& dstate);

DetailedTrajectory simulate_detailed(const DetailedParams& params, const TimeGrid& grid, double substep = 0.1);

/// Writes the trajectory as `t,<compartment names...>` CSV.
void write_trajectory_csv(const DetailedTrajectory& traj, const std::string& path);

} // namespace epf

#endif // EPF_CORE_DETAILED_HPP
