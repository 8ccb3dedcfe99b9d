#ifndef GPB_REPORT_HPP
#define GPB_REPORT_HPP

#include <string>

namespace gpb {

/// Verdict of a numerical verification: the worst residual seen and the bound it was held to.
struct CheckReport {
  std::string name;
  bool pass = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;

  static CheckReport from_residual(std::string name, double residual, double tol,
                                   std::string detail = {}) {
    return {std::move(name), residual <= tol, residual, tol, std::move(detail)};
  }
};

}  // namespace gpb

#endif  // GPB_REPORT_HPP
