#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ubi/config.hpp"
#include "ubi/portfolio.hpp"

namespace ubi {

// Portfolio file: one driver per row,
// id,beta_p,beta_y,theta_p,theta_y,baseline_p,baseline_y,premium,p0,y0
void write_portfolio_csv(const std::filesystem::path& path, std::span<const Driver> portfolio);
std::vector<Driver> read_portfolio_csv(const std::filesystem::path& path);

// Observations file: one row per driver-period,
// driver_id,period,discount,observed_p,observed_y,premium
struct ObservationsFile {
    std::vector<long long> ids;
    std::vector<ObservationSeries> series;
    std::vector<double> premiums;
};
void write_observations_csv(const std::filesystem::path& path, const ObservationsFile& obs);
ObservationsFile read_observations_csv(const std::filesystem::path& path);

// Command bodies behind the CLI. All are pure functions of (config, input
// files, seed); they write their outputs plus a resolved_config.json echo
// into out_dir. Exit codes: 0 success (optimize: converged),
// 2 optimize finished feasible but unconverged, 3 optimize needed repair.
int cmd_generate(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_estimate(const RunConfig& cfg, const std::filesystem::path& observations_path,
                 const std::filesystem::path& out_dir);
int cmd_optimize(const RunConfig& cfg, const std::filesystem::path& portfolio_path,
                 const std::filesystem::path& out_dir);
int cmd_experiment(const RunConfig& cfg, const std::filesystem::path& out_dir);
int cmd_gap(const RunConfig& cfg, const std::filesystem::path& out_dir);

}  // namespace ubi
