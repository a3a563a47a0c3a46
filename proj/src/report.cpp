#include "sgdlab/report.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace sgdlab {

double wilson_half_width(double p_hat, long n, double z) {
  if (n <= 0) return 1.0;
  const double nn = static_cast<double>(n);
  const double z2 = z * z;
  return z * std::sqrt(p_hat * (1.0 - p_hat) / nn + z2 / (4.0 * nn * nn)) / (1.0 + z2 / nn);
}

double wilson_center(double p_hat, long n, double z) {
  if (n <= 0) return 0.5;
  const double nn = static_cast<double>(n);
  const double z2 = z * z;
  return (p_hat + z2 / (2.0 * nn)) / (1.0 + z2 / nn);
}

void ExperimentReport::write_csv(std::ostream& os) const {
  os << "label,param,estimate,half_width,n,seed,runtime_s\n";
  os.precision(17);
  for (const auto& r : rows)
    os << r.label << "," << r.param << "," << r.estimate << "," << r.half_width << "," << r.n << ","
       << r.seed << "," << r.runtime_s << "\n";
}

std::string ExperimentReport::summary() const {
  std::ostringstream os;
  os.precision(6);
  os << op << ":\n";
  for (const auto& r : rows)
    os << "  " << r.label << ": estimate " << r.estimate << " +/- " << r.half_width << " (n=" << r.n
       << ")\n";
  return os.str();
}

}  // namespace sgdlab
