#ifndef SGDLAB_REPORT_HPP_
#define SGDLAB_REPORT_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sgdlab {

/// Wilson 95% interval half-width for a binomial proportion; better coverage
/// than Wald near 0 and 1.
double wilson_half_width(double p_hat, long n, double z = 1.959963984540054);

/// Wilson-centered estimate (the interval midpoint).
double wilson_center(double p_hat, long n, double z = 1.959963984540054);

struct ReportRow {
  std::string label;        // e.g. "gamma=0.01"
  double param = 0.0;       // the swept parameter value
  double estimate = 0.0;
  double half_width = 0.0;
  long n = 0;               // runs or samples behind the estimate
  std::uint64_t seed = 0;
  double runtime_s = 0.0;
};

/// Monte Carlo experiment output: one row per configuration, plus metadata
/// echoing the resolved config.
struct ExperimentReport {
  std::string op;
  std::string config_echo;  // canonical JSON of the resolved configuration
  std::vector<ReportRow> rows;

  /// CSV schema (fixed): label,param,estimate,half_width,n,seed,runtime_s
  void write_csv(std::ostream& os) const;
  std::string summary() const;
};

}  // namespace sgdlab

#endif  // SGDLAB_REPORT_HPP_
