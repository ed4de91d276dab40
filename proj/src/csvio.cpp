#include "hdfts/csvio.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hdfts {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::filesystem::path target(path);
  if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
  const std::filesystem::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("atomic_write: cannot open " + tmp.string());
    out << content;
    if (!out.good()) throw std::runtime_error("atomic_write: write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

namespace {
std::string version_line() { return std::string("# hdfts ") + kVersion + "\n"; }
}  // namespace

std::string panel_csv(const FunctionalPanel& panel) {
  std::ostringstream out;
  out << version_line() << "series,t,j,idx,value\n";
  const int g = panel.basis.size;
  for (int t = 0; t < panel.n; ++t)
    for (int j = 0; j < panel.p; ++j)
      for (int i = 0; i < g; ++i)
        out << "X," << t + 1 << ',' << j + 1 << ',' << i + 1 << ','
            << fmt_double(panel.x(t, static_cast<Eigen::Index>(j) * g + i)) << '\n';
  for (int t = 0; t < panel.n; ++t)
    for (int k = 0; k < panel.z.cols(); ++k)
      out << "Z," << t + 1 << ',' << k + 1 << ",0," << fmt_double(panel.z(t, k)) << '\n';
  if (panel.has_scalar_response())
    for (int t = 0; t < panel.n; ++t)
      out << "Y," << t + 1 << ",0,0," << fmt_double(panel.y[t]) << '\n';
  if (panel.has_functional_response())
    for (int t = 0; t < panel.n; ++t)
      for (int i = 0; i < panel.yf.cols(); ++i)
        out << "YF," << t + 1 << ",0," << i + 1 << ',' << fmt_double(panel.yf(t, i)) << '\n';
  return out.str();
}

std::string records_csv(const std::vector<StudyRecord>& records) {
  std::ostringstream out;
  out << version_line() << "study,n,p,d,s,q,replicate,statistic,value,seconds\n";
  for (const auto& r : records)
    out << r.study << ',' << r.n << ',' << r.p << ',' << r.d << ',' << r.s << ',' << r.q << ','
        << r.replicate << ',' << r.statistic << ',' << fmt_double(r.value) << ','
        << fmt_double(r.seconds) << '\n';
  return out.str();
}

std::string stability_csv(const StabilityReport& report) {
  std::ostringstream out;
  out << version_line() << "measure,k,value,grid_size,ridge\n";
  const auto row = [&](const char* name, int k, double v) {
    out << name << ',' << k << ',' << fmt_double(v) << ',' << report.grid_size << ','
        << fmt_double(report.ridge_rel) << '\n';
  };
  if (report.m_x) row("M_X", 0, *report.m_x);
  if (report.m_y) row("M_Y", 0, *report.m_y);
  if (report.m_z) row("M_Z", 0, *report.m_z);
  if (report.m_xy) row("M_XY", 0, *report.m_xy);
  if (report.m_xz) row("M_XZ", 0, *report.m_xz);
  if (report.m_tilde) row("M_tilde", 0, *report.m_tilde);
  for (const auto& [k, v] : report.m_k) row("M_k", k, v);
  return out.str();
}

std::string eigenvalues_csv(const EigenSystem& es) {
  std::ostringstream out;
  out << version_line() << "j,l,eigenvalue\n";
  for (int j = 0; j < es.p; ++j)
    for (int l = 0; l < es.omega.cols(); ++l)
      out << j + 1 << ',' << l + 1 << ',' << fmt_double(es.omega(j, l)) << '\n';
  return out.str();
}

std::string scores_csv(const EigenSystem& es) {
  std::ostringstream out;
  out << version_line() << "t,j,l,value\n";
  for (int t = 0; t < es.n; ++t)
    for (int j = 0; j < es.p; ++j)
      for (int l = 0; l < es.q[j]; ++l)
        out << t + 1 << ',' << j + 1 << ',' << l + 1 << ',' << fmt_double(es.scores[j](t, l))
            << '\n';
  return out.str();
}

std::string curve_csv(const Curve& c) {
  std::ostringstream out;
  out << version_line() << "idx,value\n";
  for (int i = 0; i < c.coef.size(); ++i)
    out << i + 1 << ',' << fmt_double(c.coef[i]) << '\n';
  return out.str();
}

std::string kernel_csv(const OperatorKernel& k) {
  std::ostringstream out;
  out << version_line() << "row,col,value\n";
  for (int i = 0; i < k.coef.rows(); ++i)
    for (int j = 0; j < k.coef.cols(); ++j)
      out << i + 1 << ',' << j + 1 << ',' << fmt_double(k.coef(i, j)) << '\n';
  return out.str();
}

std::string fllr_surfaces_csv(const FllrFit& fit) {
  std::ostringstream out;
  out << version_line() << "h,j,row,col,value\n";
  for (int h = 0; h <= fit.L; ++h)
    for (int j = 0; j < fit.p; ++j) {
      const auto b = fit.beta.block(h * fit.p + j, 0);
      for (int r = 0; r < b.rows(); ++r)
        for (int c = 0; c < b.cols(); ++c)
          out << h << ',' << j + 1 << ',' << r + 1 << ',' << c + 1 << ','
              << fmt_double(b(r, c)) << '\n';
    }
  return out.str();
}

std::string fllr_path_csv(const std::vector<FllrFit>& fits) {
  std::ostringstream out;
  out << version_line() << "lambda,support_size,sweeps,kkt_residual,objective\n";
  for (const auto& f : fits)
    out << fmt_double(f.lambda) << ',' << f.support.size() << ',' << f.sweeps << ','
        << fmt_double(f.kkt_residual) << ','
        << fmt_double(f.objective_trace.empty() ? 0.0 : f.objective_trace.back()) << '\n';
  return out.str();
}

std::string pflr_curves_csv(const PflrFit& fit) {
  std::ostringstream out;
  out << version_line() << "j,idx,value\n";
  for (int j = 0; j < fit.p; ++j) {
    const auto b = fit.beta.block(j, 0);
    for (int r = 0; r < b.rows(); ++r)
      out << j + 1 << ',' << r + 1 << ',' << fmt_double(b(r, 0)) << '\n';
  }
  return out.str();
}

}  // namespace hdfts
