#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "lpexit/lsmc.hpp"
#include "lpexit/pde.hpp"
#include "lpexit/simulate.hpp"

namespace lpexit {

/// Shortest decimal text that round-trips to the same double.
std::string fmt_double(double v);
std::string csv_quote(const std::string& field);

struct PathExportOptions {
  int step_stride = 1;  // every k-th step (the last step is always written)
  int max_paths = -1;   // -1: all
};

/// Columns path,t,S,Y,X,R,IL,perf.
void write_paths_csv(std::ostream& os, const PathBundle& b, const PathExportOptions& opt = {});

/// Columns t,process,q_lo,q_hi.
void write_quantiles_csv(std::ostream& os, const PathBundle& b,
                         const std::vector<QuantileCurves>& curves);

/// Compact binary dump; read_bundle restores an identical bundle.
void write_bundle(std::ostream& os, const PathBundle& b);
PathBundle read_bundle(std::istream& is);

/// Columns bin_lo,bin_hi,count over [0, T].
void write_exit_histogram_csv(std::ostream& os, const LsmcResult& res, double horizon_T,
                              int n_bins = 50);
/// Columns step,t,s_mean,s_scale,y_mean,y_scale,c0..c{p-1}.
void write_coefficients_csv(std::ostream& os, const LsmcResult& res, const PathBundle& b);

/// JSON object with v0, stderr, mean_tau, mean_R, mean_IL, std_tau, std_R, std_IL.
std::string lsmc_summary_json(const LsmcResult& res, const ExitStatistics& st);

/// Columns t,y,S,v,in_exercise_region.
void write_value_grid_csv(std::ostream& os, const std::vector<SliceRow>& rows);
/// Every recorded level; y_stride keeps every k-th reserve row.
void write_value_grid_csv(std::ostream& os, const ValueGrid& vg, int y_stride = 1);
/// Columns t,y,s_lo,s_hi: continuation intervals.
void write_policy_csv(std::ostream& os, const PolicySurface& ps);

}  // namespace lpexit
