#include "lpexit/experiments.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "lpexit/io.hpp"

namespace lpexit {

const char* to_string(OverrideTarget target) {
  switch (target) {
    case OverrideTarget::none: return "none";
    case OverrideTarget::sigma: return "sigma";
    case OverrideTarget::fee: return "fee";
    case OverrideTarget::a1: return "a1";
    case OverrideTarget::a2: return "a2";
  }
  return "none";
}

OverrideTarget parse_override_target(const std::string& name) {
  if (name == "none") return OverrideTarget::none;
  if (name == "sigma") return OverrideTarget::sigma;
  if (name == "fee") return OverrideTarget::fee;
  if (name == "a1") return OverrideTarget::a1;
  if (name == "a2") return OverrideTarget::a2;
  throw std::invalid_argument("unknown sweep target '" + name + "' (sigma|fee|a1|a2)");
}

void Scenario::validate() const {
  // A zero fee is still a valid schedule; every other multiplier must be positive.
  const bool zero_ok = target == OverrideTarget::fee;
  if (!(factor > 0 || (zero_ok && factor == 0)))
    throw std::invalid_argument("scenario '" + label + "': factor must be positive");
}

ModelSetup Scenario::applied() const {
  validate();
  ModelSetup s = base;
  switch (target) {
    case OverrideTarget::none: break;
    case OverrideTarget::sigma: s.market.sigma *= factor; break;
    case OverrideTarget::fee: s.fee = s.fee.scaled(factor); break;
    case OverrideTarget::a1: s.market.a1 *= factor; break;
    case OverrideTarget::a2: s.market.a2 *= factor; break;
  }
  s.pool.validate();
  s.market.validate();
  s.fee.validate();
  s.sim.validate();
  return s;
}

std::string multiplier_label(OverrideTarget target, double factor) {
  const std::string name = to_string(target);
  if (factor == 1.0) return name;
  auto integral = [](double v) { return std::abs(v - std::round(v)) < 1e-9; };
  std::ostringstream os;
  if (factor > 1.0 && integral(factor)) {
    os << std::llround(factor) << ' ' << name;
  } else if (factor > 0 && factor < 1.0 && integral(1.0 / factor)) {
    os << name << '/' << std::llround(1.0 / factor);
  } else {
    os << factor << " " << name;
  }
  return os.str();
}

std::vector<Scenario> multiplier_scenarios(const ModelSetup& base, OverrideTarget target,
                                           const std::vector<double>& factors) {
  std::vector<Scenario> out;
  out.reserve(factors.size());
  for (double f : factors) out.push_back({multiplier_label(target, f), base, target, f});
  return out;
}

double SweepRow::se_perf() const { return n_paths > 0 ? std_perf / std::sqrt(n_paths) : 0.0; }
double SweepRow::se_R() const { return n_paths > 0 ? std_R / std::sqrt(n_paths) : 0.0; }
double SweepRow::se_IL() const { return n_paths > 0 ? std_IL / std::sqrt(n_paths) : 0.0; }

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finaliser over (base, stream)
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SweepReport run_sweep(const std::vector<Scenario>& scenarios, SeedPolicy policy) {
  SweepReport report;
  report.rows.reserve(scenarios.size());
  for (std::size_t k = 0; k < scenarios.size(); ++k) {
    const Scenario& sc = scenarios[k];
    SweepRow row;
    row.label = sc.label;
    row.factor = sc.factor;
    row.seed = policy == SeedPolicy::common ? sc.base.sim.seed : derive_seed(sc.base.sim.seed, k);
    row.n_paths = sc.base.sim.n_paths;
    try {
      ModelSetup setup = sc.applied();
      setup.sim.seed = row.seed;
      const PathBundle bundle = simulate(setup.pool, setup.market, setup.fee, setup.sim);
      const LsmcResult res = backward_induct(bundle, setup.lsmc);
      const ExitStatistics st = exit_statistics(res, bundle);
      row.mean_tau = st.mean_tau;
      row.std_tau = st.std_tau;
      row.mean_R = st.mean_R;
      row.std_R = st.std_R;
      row.mean_IL = st.mean_IL;
      row.std_IL = st.std_IL;
      row.mean_perf = st.mean_perf;
      row.std_perf = st.std_perf;
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

std::vector<PerformancePoint> performance_curve(const ModelSetup& base,
                                                const std::vector<double>& fee_multipliers,
                                                SeedPolicy policy) {
  for (double f : fee_multipliers)
    if (!(f >= 0)) throw std::invalid_argument("fee multipliers must be nonnegative");
  const SweepReport rep =
      run_sweep(multiplier_scenarios(base, OverrideTarget::fee, fee_multipliers), policy);
  std::vector<PerformancePoint> out;
  for (const auto& row : rep.rows) {
    if (!row.ok()) throw std::runtime_error("performance curve row " + row.label + ": " + row.error);
    out.push_back({row.factor, row.mean_perf, row.std_perf, row.se_perf()});
  }
  return out;
}

std::vector<ExitPoint> exit_scatter(const PathBundle& bundle, const LsmcResult& result) {
  std::vector<ExitPoint> out(bundle.n_paths());
  for (int i = 0; i < bundle.n_paths(); ++i) {
    const int k = result.exit_index(i);
    out[i] = {i, result.exit_times(i), bundle.s(i, k), bundle.perf(i, k)};
  }
  return out;
}

void write_sweep_csv(std::ostream& os, const SweepReport& report) {
  os << "label,mean_tau,std_tau,mean_R,std_R,mean_IL,std_IL,mean_perf,std_perf,n_paths,seed\n";
  for (const auto& r : report.rows) {
    os << csv_quote(r.label) << ',' << fmt_double(r.mean_tau) << ',' << fmt_double(r.std_tau)
       << ',' << fmt_double(r.mean_R) << ',' << fmt_double(r.std_R) << ','
       << fmt_double(r.mean_IL) << ',' << fmt_double(r.std_IL) << ',' << fmt_double(r.mean_perf)
       << ',' << fmt_double(r.std_perf) << ',' << r.n_paths << ',' << r.seed << '\n';
  }
}

namespace {
std::string thousands(double v) {
  const long long n = std::llround(v);
  std::string digits = std::to_string(n < 0 ? -n : n);
  std::string out;
  int count = 0;
  for (auto it = digits.rbegin(); it != digits.rend(); ++it) {
    if (count && count % 3 == 0) out.insert(out.begin(), ',');
    out.insert(out.begin(), *it);
    ++count;
  }
  return n < 0 ? "-" + out : out;
}
}  // namespace

void render_sweep_table(std::ostream& os, const SweepReport& report, const std::string& heading) {
  os << heading << "\n";
  os << std::left << std::setw(12) << "scenario" << std::right << std::setw(16) << "E[tau]"
     << std::setw(26) << "E[R_tau]" << std::setw(26) << "E[IL_tau]" << std::setw(14)
     << "SE(perf)" << "\n";
  for (const auto& r : report.rows) {
    os << std::left << std::setw(12) << r.label << std::right;
    if (!r.ok()) {
      os << "  failed: " << r.error << "\n";
      continue;
    }
    std::ostringstream tau;
    tau << std::fixed << std::setprecision(2) << r.mean_tau << " (" << r.std_tau << ")";
    os << std::setw(16) << tau.str() << std::setw(26)
       << (thousands(r.mean_R) + " (" + thousands(r.std_R) + ")") << std::setw(26)
       << (thousands(r.mean_IL) + " (" + thousands(r.std_IL) + ")") << std::setw(14)
       << thousands(r.se_perf()) << "\n";
  }
}

}  // namespace lpexit
