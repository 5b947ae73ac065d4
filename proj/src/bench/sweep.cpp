#include "dopt/bench/sweep.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "dopt/bench/metrics.hpp"

namespace dopt::bench {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double trace_rwc(const RunTrace& trace, double lambda, double float_cost, bool ops_proxy) {
  const auto& last = trace.last();
  const double t_cp = ops_proxy ? static_cast<double>(last.cum_ops) : last.cum_seconds;
  return rwc(t_cp, static_cast<double>(last.cum_floats) * float_cost, lambda);
}

std::string RwcReport::to_csv() const {
  std::ostringstream os;
  os << "algorithm,N,n,lambda,t_cp_seconds,t_cp_ops,t_cm_floats,rwc,converged,iterations\n";
  for (const auto& c : cells)
    os << c.algorithm << ',' << c.nodes << ',' << c.dim << ',' << format_double(c.lambda) << ','
       << format_double(c.t_cp_seconds) << ',' << c.t_cp_ops << ',' << c.t_cm_floats << ',' << format_double(c.rwc)
       << ',' << (c.converged ? 1 : 0) << ',' << c.iterations << '\n';
  return os.str();
}

const RwcCell* RwcReport::find(const std::string& algorithm, Eigen::Index dim, double lambda) const {
  for (const auto& c : cells)
    if (c.algorithm == algorithm && c.dim == dim && c.lambda == lambda) return &c;
  return nullptr;
}

RwcReport sweep_rwc(const std::vector<AlgorithmEntry>& algorithms, const std::vector<SweepCase>& cases,
                    const std::vector<double>& lambdas, const SweepOptions& opts) {
  RwcReport report;
  report.lambdas = lambdas;
  for (const auto& sc : cases) {
    for (const auto& entry : algorithms) {
      nlohmann::json params = entry.params;
      if (entry.tune)
        params = tune_algorithm(entry.name, params, sc.context, opts.stop, opts.exec, opts.tune_iterations).params;
      RunTrace trace;
      bool failed = false;
      try {
        trace = run_rounds(*make_algorithm(entry.name, params), sc.context, opts.stop, opts.exec);
      } catch (const CapabilityError&) {
        throw;
      } catch (const Error&) {
        failed = true;
      }
      for (double lambda : lambdas) {
        RwcCell cell;
        cell.algorithm = entry.name;
        cell.nodes = sc.nodes;
        cell.dim = sc.dim;
        cell.lambda = lambda;
        if (failed || trace.records.empty()) {
          cell.rwc = std::numeric_limits<double>::infinity();
        } else {
          const auto& last = trace.last();
          cell.t_cp_seconds = last.cum_seconds;
          cell.t_cp_ops = last.cum_ops;
          cell.t_cm_floats = last.cum_floats;
          cell.rwc = trace_rwc(trace, lambda, opts.float_cost, opts.ops_proxy);
          cell.converged = trace.reason == Termination::kConverged;
          cell.iterations = trace.iterations();
        }
        report.cells.push_back(cell);
      }
    }
  }
  return report;
}

std::vector<SensitivityPoint> stepsize_sensitivity(const std::string& name, const nlohmann::json& base,
                                                   const std::string& parameter, const std::vector<double>& grid,
                                                   const RunContext& ctx, int cap, double tol,
                                                   const ExecOptions& opts) {
  StopRule stop;
  stop.cap = cap;
  stop.tol = tol;
  std::vector<SensitivityPoint> out;
  for (double v : grid) {
    nlohmann::json p = base.is_null() ? nlohmann::json::object() : base;
    p[parameter] = v;
    SensitivityPoint pt;
    pt.value = v;
    try {
      const auto trace = run_rounds(*make_algorithm(name, p), ctx, stop, opts);
      pt.final_mse = trace.last().mse;
      pt.diverged = trace.reason == Termination::kDiverged;
      pt.converged = trace.reason == Termination::kConverged;
      pt.iterations = trace.iterations();
    } catch (const CapabilityError&) {
      throw;
    } catch (const Error&) {
      pt.final_mse = std::numeric_limits<double>::infinity();
      pt.diverged = true;
    }
    out.push_back(pt);
  }
  return out;
}

std::string sensitivity_csv(const std::string& name, const std::string& parameter,
                            const std::vector<SensitivityPoint>& points) {
  std::ostringstream os;
  os << "algorithm,parameter,value,final_mse,diverged,converged,iterations\n";
  for (const auto& p : points)
    os << name << ',' << parameter << ',' << format_double(p.value) << ',' << format_double(p.final_mse) << ','
       << (p.diverged ? 1 : 0) << ',' << (p.converged ? 1 : 0) << ',' << p.iterations << '\n';
  return os.str();
}

}  // namespace dopt::bench
