#include <aqualift/io.hpp>

#include <aqualift/errors.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace aqualift {

namespace {

std::string g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_trace_csv(const std::string& path, const std::vector<TraceRow>& rows, int n_cables) {
  std::ofstream f(path);
  if (!f) throw ValidationError("write_trace_csv: cannot open " + path);

  f << "t,xL_x,xL_y,xL_z,vL_x,vL_y,vL_z,qw,qx,qy,qz,OmL_x,OmL_y,OmL_z";
  for (int j = 1; j <= n_cables; ++j) {
    f << ",q" << j << "_x,q" << j << "_y,q" << j << "_z"
      << ",w" << j << "_x,w" << j << "_y,w" << j << "_z";
  }
  f << ",m_true,m_hat"
    << ",Jtrue_xx,Jtrue_yy,Jtrue_zz,Jtrue_xy,Jtrue_xz,Jtrue_yz"
    << ",Jhat_xx,Jhat_yy,Jhat_zz,Jhat_xy,Jhat_xz,Jhat_yz";
  for (int j = 1; j <= n_cables; ++j) f << ",u" << j << "_norm";
  f << ",pe_integrand\n";

  for (const auto& r : rows) {
    f << g(r.t);
    for (int i = 0; i < 3; ++i) f << ',' << g(r.x(i));
    for (int i = 0; i < 3; ++i) f << ',' << g(r.v(i));
    for (int i = 0; i < 4; ++i) f << ',' << g(r.quat(i));
    for (int i = 0; i < 3; ++i) f << ',' << g(r.Omega(i));
    for (int j = 0; j < n_cables; ++j) {
      for (int i = 0; i < 3; ++i) f << ',' << g(r.q[j](i));
      for (int i = 0; i < 3; ++i) f << ',' << g(r.omega[j](i));
    }
    f << ',' << g(r.m_true) << ',' << g(r.m_hat);
    for (int i = 0; i < 6; ++i) f << ',' << g(r.J_true(i));
    for (int i = 0; i < 6; ++i) f << ',' << g(r.J_hat(i));
    for (int j = 0; j < n_cables; ++j) f << ',' << g(r.u_norm[j]);
    f << ',' << g(r.pe_integrand) << '\n';
  }
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("read_trace_csv: cannot open " + path);
  std::string header;
  if (!std::getline(f, header)) throw ParseError("read_trace_csv: empty file " + path);
  const auto cols = split_csv_line(header);
  if (cols.empty() || cols[0] != "t") {
    throw ParseError("read_trace_csv: not a trace file (missing 't' column)");
  }

  // Cable count from the column layout.
  int n_cables = 0;
  for (const auto& c : cols) {
    if (c.rfind("u", 0) == 0 && c.find("_norm") != std::string::npos) ++n_cables;
  }
  const std::size_t expected = 1 + 3 + 3 + 4 + 3 + 6 * n_cables + 2 + 12 + n_cables + 1;
  if (cols.size() != expected) {
    throw ParseError("read_trace_csv: unexpected column count in " + path);
  }

  std::vector<TraceRow> rows;
  std::string line;
  int line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto v = split_csv_line(line);
    if (v.size() != expected) {
      throw ParseError("read_trace_csv: bad field count at line " + std::to_string(line_no));
    }
    std::size_t c = 0;
    auto next = [&]() {
      try {
        return std::stod(v[c++]);
      } catch (const std::exception&) {
        throw ParseError("read_trace_csv: bad number at line " + std::to_string(line_no) +
                         ", field " + std::to_string(c));
      }
    };
    TraceRow r;
    r.t = next();
    for (int i = 0; i < 3; ++i) r.x(i) = next();
    for (int i = 0; i < 3; ++i) r.v(i) = next();
    for (int i = 0; i < 4; ++i) r.quat(i) = next();
    for (int i = 0; i < 3; ++i) r.Omega(i) = next();
    r.q.resize(n_cables);
    r.omega.resize(n_cables);
    r.u_norm.resize(n_cables);
    for (int j = 0; j < n_cables; ++j) {
      for (int i = 0; i < 3; ++i) r.q[j](i) = next();
      for (int i = 0; i < 3; ++i) r.omega[j](i) = next();
    }
    r.m_true = next();
    r.m_hat = next();
    for (int i = 0; i < 6; ++i) r.J_true(i) = next();
    for (int i = 0; i < 6; ++i) r.J_hat(i) = next();
    for (int j = 0; j < n_cables; ++j) r.u_norm[j] = next();
    r.pe_integrand = next();
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<TrajSample> traj_from_trace(const std::vector<TraceRow>& rows, double g_acc) {
  std::vector<TrajSample> out(rows.size());
  const std::size_t n = rows.size();
  for (std::size_t i = 0; i < n; ++i) {
    out[i].t = rows[i].t;
    out[i].x = rows[i].x;
    out[i].v = rows[i].v;
    out[i].Omega = rows[i].Omega;
  }
  // Central differences for acceleration, angular acceleration and jerk.
  auto central = [&](auto value, std::size_t i) -> Vec3 {
    if (n < 2) return Vec3::Zero();
    const std::size_t lo = i == 0 ? 0 : i - 1;
    const std::size_t hi = i + 1 >= n ? n - 1 : i + 1;
    const double dt = rows[hi].t - rows[lo].t;
    if (dt <= 0.0) return Vec3::Zero();
    return (value(hi) - value(lo)) / dt;
  };
  for (std::size_t i = 0; i < n; ++i) {
    out[i].a = central([&](std::size_t k) { return rows[k].v; }, i);
    out[i].Omega_dot = central([&](std::size_t k) { return rows[k].Omega; }, i);
  }
  for (std::size_t i = 0; i < n; ++i) {
    out[i].jerk = central([&](std::size_t k) { return out[k].a; }, i);
  }
  (void)g_acc;
  return out;
}

std::vector<TrajSample> read_traj_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("read_traj_csv: cannot open " + path);
  std::string header;
  if (!std::getline(f, header)) throw ParseError("read_traj_csv: empty file " + path);
  const auto cols = split_csv_line(header);

  if (!cols.empty() && cols[0] == "t" && cols.size() == 13 && cols[1] == "x") {
    // Plan export: analytic derivative columns.
    std::vector<TrajSample> out;
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      const auto v = split_csv_line(line);
      if (v.size() != 13) throw ParseError("read_traj_csv: bad field count in " + path);
      TrajSample s;
      try {
        s.t = std::stod(v[0]);
        for (int i = 0; i < 3; ++i) s.x(i) = std::stod(v[1 + i]);
        for (int i = 0; i < 3; ++i) s.v(i) = std::stod(v[4 + i]);
        for (int i = 0; i < 3; ++i) s.a(i) = std::stod(v[7 + i]);
        for (int i = 0; i < 3; ++i) s.jerk(i) = std::stod(v[10 + i]);
      } catch (const ParseError&) {
        throw;
      } catch (const std::exception&) {
        throw ParseError("read_traj_csv: bad number in " + path);
      }
      out.push_back(s);
    }
    return out;
  }

  // Otherwise assume the harness trace format.
  return traj_from_trace(read_trace_csv(path));
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<PlotSeries>& series) {
  std::ofstream f(path);
  if (!f) throw ValidationError("write_svg_plot: cannot open " + path);

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
  double y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (double v : s.x) {
      x0 = std::min(x0, v);
      x1 = std::max(x1, v);
    }
    for (double v : s.y) {
      y0 = std::min(y0, v);
      y1 = std::max(y1, v);
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }

  const double W = 720, H = 420, ml = 60, mr = 20, mt = 40, mb = 40;
  auto px = [&](double x) { return ml + (x - x0) / (x1 - x0) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (y - y0) / (y1 - y0) * (H - mt - mb); };
  const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\""
    << " font-size=\"14\">" << title << "</text>\n";
  f << "<line x1=\"" << ml << "\" y1=\"" << H - mb << "\" x2=\"" << W - mr << "\" y2=\""
    << H - mb << "\" stroke=\"black\"/>\n";
  f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << H - mb
    << "\" stroke=\"black\"/>\n";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3g", y0);
  f << "<text x=\"4\" y=\"" << py(y0) << "\" font-size=\"11\" font-family=\"sans-serif\">"
    << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", y1);
  f << "<text x=\"4\" y=\"" << py(y1) << "\" font-size=\"11\" font-family=\"sans-serif\">"
    << buf << "</text>\n";
  std::snprintf(buf, sizeof(buf), "%.3g", x1);
  f << "<text x=\"" << px(x1) - 10 << "\" y=\"" << H - mb + 16
    << "\" font-size=\"11\" font-family=\"sans-serif\">" << buf << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const auto& s = series[si];
    if (s.x.empty()) continue;
    // Long traces decimate to <= 2000 points per polyline.
    const std::size_t stride = std::max<std::size_t>(1, s.x.size() / 2000);
    f << "<polyline fill=\"none\" stroke=\"" << palette[si % 6] << "\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); i += stride) {
      f << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
    }
    f << "\"/>\n";
    f << "<text x=\"" << W - mr - 120 << "\" y=\"" << mt + 14 * (si + 1)
      << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" << palette[si % 6] << "\">"
      << s.label << "</text>\n";
  }
  f << "</svg>\n";
}

}  // namespace aqualift
