#include <ostream>
#include <string>

#include "dobc/format.hpp"
#include "dobc/simulator.hpp"

namespace dobc {

namespace {

void header_group(std::ostream& os, const char* name, Eigen::Index rows) {
  for (Eigen::Index r = 0; r < rows; ++r) os << ',' << name << '_' << (r + 1);
}

void row_group(std::ostream& os, const Mat& M, Eigen::Index col) {
  for (Eigen::Index r = 0; r < M.rows(); ++r) os << ',' << format_double(M(r, col));
}

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::pair<const char*, const Mat*> groups[] = {
      {"z", &traj.z}, {"x", &traj.x}, {"zbar", &traj.zbar}, {"q", &traj.q},
      {"p", &traj.p}, {"y", &traj.y}, {"u", &traj.u},       {"w", &traj.w}};
  os << 't';
  for (const auto& [name, M] : groups) header_group(os, name, M->rows());
  os << '\n';
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    os << format_double(traj.times[k]);
    for (const auto& g : groups) row_group(os, *g.second, static_cast<Eigen::Index>(k));
    os << '\n';
  }
}

void write_sweep_csv(std::ostream& os, const SweepReport& report) {
  os << "tau,status,ultimate_bound,recovery_error,effort_l1,effort_l2,xi_tail,eta_error_tail\n";
  for (const auto& e : report.entries) {
    os << format_double(e.tau) << ',' << to_string(e.status) << ',' << format_double(e.ultimate_bound) << ','
       << format_double(e.recovery_error) << ',' << format_double(e.effort_l1) << ','
       << format_double(e.effort_l2) << ',' << format_double(e.xi_tail) << ','
       << format_double(e.eta_error_tail) << '\n';
  }
}

}  // namespace dobc
