// Thin command-line front end over the epiforecast shared library. All
// behavior lives behind the C API; this file only parses arguments and maps
// status codes to exit codes.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epiforecast/epiforecast.h"

namespace
{

// Exit codes: 0 success, 2 validation/input problems, 3 numeric failures.
int exit_code(epf_status status)
{
    switch (status)
    {
    case EPF_OK:
        return 0;
    case EPF_ERR_NUMERIC:
    case EPF_ERR_DEGENERATE:
    case EPF_ERR_SINGULAR:
        return 3;
    default:
        return 2;
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Epidemic forecasting from collapsed compartmental models"};
    app.set_version_flag("--version", epf_version());
    app.require_subcommand(1);

    std::string config_path;
    double population = 0.0;
    double adjustment_factor = 0.0;
    int smooth_window = 0;
    int jobs = 0;
    bool emit_plot_data = false;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"train", "Sample scenarios, collapse them and build reduced bases"},
        {"fit", "Fit basis coefficients to an observed series"},
        {"forecast", "Propagate fitted models past the fit window"},
        {"evaluate", "Score forecasts against a truth series"},
        {"plot-data", "Write plot-ready CSVs for the observed data and fits"},
    };
    for (const auto& [name, description] : commands)
    {
        CLI::App* sub = app.add_subcommand(name, description);
        sub->add_option("config", config_path, "JSON run configuration")->required();
        sub->add_option("--jobs", jobs, "Worker threads; results do not depend on this")
            ->check(CLI::PositiveNumber);
        sub->add_option("--population", population, "Override the config population")->check(CLI::PositiveNumber);
        sub->add_option("--adjustment-factor", adjustment_factor,
                        "Override the under-reporting correction (config default 15)")
            ->check(CLI::PositiveNumber);
        sub->add_option("--smooth-window", smooth_window,
                        "Override the odd smoothing window in days (config default 7)")
            ->check(CLI::PositiveNumber);
        sub->add_flag("--emit-plot-data", emit_plot_data, "Also write plot CSVs under <output_dir>/plot");
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return 2;
    }

    std::string command;
    for (const auto& [name, description] : commands)
    {
        (void)description;
        if (app.got_subcommand(name))
            command = name;
    }

    epf_run_options options{};
    options.population = population;
    options.adjustment_factor = adjustment_factor;
    options.smooth_window = smooth_window;
    options.jobs = jobs;
    options.emit_plot_data = emit_plot_data ? 1 : 0;

    epf_ctx* ctx = epf_ctx_create();
    const epf_status status = epf_run(ctx, command.c_str(), config_path.c_str(), &options);
    if (status != EPF_OK)
        std::fprintf(stderr, "epiforecast: %s\n", epf_last_error(ctx));
    epf_ctx_destroy(ctx);
    return exit_code(status);
}
