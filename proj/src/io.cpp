#include "lpexit/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

namespace lpexit {

std::string fmt_double(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void write_paths_csv(std::ostream& os, const PathBundle& b, const PathExportOptions& opt) {
  const int stride = std::max(1, opt.step_stride);
  const int paths = opt.max_paths < 0 ? b.n_paths() : std::min(opt.max_paths, b.n_paths());
  os << "path,t,S,Y,X,R,IL,perf\n";
  for (int i = 0; i < paths; ++i) {
    for (int k = 0; k <= b.n_steps(); ++k) {
      if (k % stride != 0 && k != b.n_steps()) continue;
      os << i << ',' << fmt_double(b.times(k)) << ',' << fmt_double(b.s(i, k)) << ','
         << fmt_double(b.y(i, k)) << ',' << fmt_double(b.x(i, k)) << ',' << fmt_double(b.r(i, k))
         << ',' << fmt_double(b.il(i, k)) << ',' << fmt_double(b.perf(i, k)) << '\n';
    }
  }
}

void write_quantiles_csv(std::ostream& os, const PathBundle& b,
                         const std::vector<QuantileCurves>& curves) {
  os << "t,process,q_lo,q_hi\n";
  for (const auto& c : curves)
    for (int k = 0; k < c.lo.size(); ++k)
      os << fmt_double(b.times(k)) << ',' << c.process << ',' << fmt_double(c.lo(k)) << ','
         << fmt_double(c.hi(k)) << '\n';
}

namespace {
constexpr char kMagic[8] = {'L', 'P', 'X', 'B', 'N', 'D', 'L', '1'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("bundle: truncated input");
  return v;
}
template <typename M>
void put_matrix(std::ostream& os, const M& m) {
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(m.size() * sizeof(typename M::Scalar)));
}
template <typename M>
void get_matrix(std::istream& is, M& m) {
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(m.size() * sizeof(typename M::Scalar)));
  if (!is) throw std::runtime_error("bundle: truncated input");
}
}  // namespace

void write_bundle(std::ostream& os, const PathBundle& b) {
  os.write(kMagic, sizeof kMagic);
  put<std::int32_t>(os, b.n_paths());
  put<std::int32_t>(os, b.n_steps());
  for (double v : {b.pool.depth_c, b.pool.trade_size_xi, b.pool.y_lower, b.pool.y_upper,
                   b.pool.y0, b.pool.x0, b.sigma, b.times(b.n_steps())})
    put(os, v);
  put<std::int64_t>(os, b.saturated_steps);
  put_matrix(os, b.s);
  put_matrix(os, b.y_index);
  put_matrix(os, b.r);
  put_matrix(os, b.buys);
  put_matrix(os, b.sells);
  put_matrix(os, b.dw);
}

PathBundle read_bundle(std::istream& is) {
  char magic[sizeof kMagic];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw std::runtime_error("bundle: bad magic");
  const auto m = get<std::int32_t>(is);
  const auto n = get<std::int32_t>(is);
  if (m <= 0 || n <= 0) throw std::runtime_error("bundle: bad dimensions");
  PoolConfig pool;
  pool.depth_c = get<double>(is);
  pool.trade_size_xi = get<double>(is);
  pool.y_lower = get<double>(is);
  pool.y_upper = get<double>(is);
  pool.y0 = get<double>(is);
  pool.x0 = get<double>(is);
  const double sigma = get<double>(is);
  const double horizon = get<double>(is);
  PathBundle b(pool, sigma, horizon, m, n);
  b.saturated_steps = get<std::int64_t>(is);
  get_matrix(is, b.s);
  get_matrix(is, b.y_index);
  get_matrix(is, b.r);
  get_matrix(is, b.buys);
  get_matrix(is, b.sells);
  get_matrix(is, b.dw);
  return b;
}

void write_exit_histogram_csv(std::ostream& os, const LsmcResult& res, double horizon_T,
                              int n_bins) {
  std::vector<long long> counts(n_bins, 0);
  for (Eigen::Index i = 0; i < res.exit_times.size(); ++i) {
    int bin = static_cast<int>(res.exit_times(i) / horizon_T * n_bins);
    counts[std::clamp(bin, 0, n_bins - 1)]++;
  }
  os << "bin_lo,bin_hi,count\n";
  for (int b = 0; b < n_bins; ++b)
    os << fmt_double(horizon_T * b / n_bins) << ',' << fmt_double(horizon_T * (b + 1) / n_bins)
       << ',' << counts[b] << '\n';
}

void write_coefficients_csv(std::ostream& os, const LsmcResult& res, const PathBundle& b) {
  os << "step,t,s_mean,s_scale,y_mean,y_scale";
  for (Eigen::Index c = 0; c < res.coefficients.cols(); ++c) os << ",c" << c;
  os << '\n';
  for (int i = 1; i < b.n_steps(); ++i) {
    os << i << ',' << fmt_double(b.times(i));
    for (int c = 0; c < 4; ++c) os << ',' << fmt_double(res.scalings(i, c));
    for (Eigen::Index c = 0; c < res.coefficients.cols(); ++c)
      os << ',' << fmt_double(res.coefficients(i, c));
    os << '\n';
  }
}

std::string lsmc_summary_json(const LsmcResult& res, const ExitStatistics& st) {
  nlohmann::ordered_json j;
  j["v0"] = res.v0_estimate;
  j["stderr"] = res.v0_stderr;
  j["mean_tau"] = st.mean_tau;
  j["mean_R"] = st.mean_R;
  j["mean_IL"] = st.mean_IL;
  j["std_tau"] = st.std_tau;
  j["std_R"] = st.std_R;
  j["std_IL"] = st.std_IL;
  j["mean_perf"] = st.mean_perf;
  j["std_perf"] = st.std_perf;
  j["n_paths"] = st.n_paths;
  j["rank_deficient_steps"] = res.rank_deficient_steps;
  return j.dump(2);
}

void write_value_grid_csv(std::ostream& os, const std::vector<SliceRow>& rows) {
  os << "t,y,S,v,in_exercise_region\n";
  for (const auto& r : rows)
    os << fmt_double(r.t) << ',' << fmt_double(r.y) << ',' << fmt_double(r.s) << ','
       << fmt_double(r.v) << ',' << (r.exercise ? 1 : 0) << '\n';
}

void write_value_grid_csv(std::ostream& os, const ValueGrid& vg, int y_stride) {
  y_stride = std::max(1, y_stride);
  os << "t,y,S,v,in_exercise_region\n";
  const Eigen::VectorXd nodes = vg.grid.s_nodes();
  for (int l = 0; l < vg.n_levels(); ++l)
    for (int r = 0; r < vg.n_y(); r += y_stride)
      for (int j = 0; j < nodes.size(); ++j)
        os << fmt_double(vg.times[l]) << ',' << fmt_double(vg.pool.lattice_value(r)) << ','
           << fmt_double(nodes(j)) << ',' << fmt_double(vg.values[l](r, j)) << ','
           << (vg.exercise[l](r, j) ? 1 : 0) << '\n';
}

void write_policy_csv(std::ostream& os, const PolicySurface& ps) {
  os << "t,y,s_lo,s_hi\n";
  for (std::size_t l = 0; l < ps.continuation.size(); ++l)
    for (std::size_t r = 0; r < ps.reserves.size(); ++r)
      for (const auto& iv : ps.continuation[l][r])
        os << fmt_double(ps.times[l]) << ',' << fmt_double(ps.reserves[r]) << ','
           << fmt_double(iv.lo) << ',' << fmt_double(iv.hi) << '\n';
}

}  // namespace lpexit
