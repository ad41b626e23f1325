#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "nhb/errors.hpp"
#include "nhb/io.hpp"

namespace nhb {

using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) fail(ErrorKind::Io, path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Io, path.string() + ": cannot open for writing");
  out << text;
  if (!out) fail(ErrorKind::Io, path.string() + ": write failed");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, path.string() + ": cannot open for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- CSV ------------------------------------------------------------------------------

void write_csv(const std::filesystem::path& path, const Table& table, const std::string& config_json,
               const std::string& summary_json) {
  std::string text;
  if (!config_json.empty()) text += "# config: " + config_json + "\n";
  if (!summary_json.empty()) text += "# summary: " + summary_json + "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i) text += (i ? "," : "") + table.columns[i];
  text += "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      fail(ErrorKind::Domain, path.string() + ": row width differs from the header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) text += ',';
      text += format_double(row[i]);
    }
    text += "\n";
  }
  write_text(path, text);
}

namespace {

double parse_cell(const std::string& cell, const std::string& where) {
  double x = 0.0;
  if (cell == "nan" || cell == "-nan") return std::nan("");
  if (cell == "inf") return std::numeric_limits<double>::infinity();
  if (cell == "-inf") return -std::numeric_limits<double>::infinity();
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), x);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) fail(ErrorKind::Parse, where + ": bad number '" + cell + "'");
  return x;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

int column(const Table& t, const std::string& name) {
  const auto it = std::find(t.columns.begin(), t.columns.end(), name);
  if (it == t.columns.end()) fail(ErrorKind::Parse, "trace has no column '" + name + "'");
  return static_cast<int>(it - t.columns.begin());
}

bool has_column(const Table& t, const std::string& name) {
  return std::find(t.columns.begin(), t.columns.end(), name) != t.columns.end();
}

const char* kAxis[] = {"1", "2", "3", "4"};

}  // namespace

CsvDocument read_csv(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  CsvDocument doc;
  std::string line;
  bool header = false;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# config: ", 0) == 0) doc.config = line.substr(10);
      else if (line.rfind("# summary: ", 0) == 0) doc.summary = line.substr(11);
      continue;
    }
    if (!header) {
      doc.table.columns = split(line);
      header = true;
      continue;
    }
    const auto cells = split(line);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != doc.table.columns.size()) fail(ErrorKind::Parse, where + ": wrong number of fields");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_cell(c, where));
    doc.table.rows.push_back(std::move(row));
  }
  if (!header) fail(ErrorKind::Parse, path.string() + ": missing header row");
  return doc;
}

// --- traces ---------------------------------------------------------------------------

Table noslip_trace_table(const NoSlipTrajectory& traj) {
  const int n = traj.dim;
  Table t;
  t.columns = {"t", "event_index"};
  for (int i = 0; i < n; ++i) t.columns.push_back(std::string("x") + kAxis[i]);
  for (int i = 0; i < n; ++i) t.columns.push_back(std::string("u") + kAxis[i]);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) t.columns.push_back(std::string("S") + kAxis[i] + kAxis[j]);
  for (const char* c : {"u_hat", "u_bar", "W", "s_bar", "E"}) t.columns.push_back(c);
  for (const auto& e : traj.events) {
    std::vector<double> row = {e.t, static_cast<double>(e.index)};
    for (int i = 0; i < n; ++i) row.push_back(e.x[i]);
    for (int i = 0; i < n; ++i) row.push_back(e.u[i]);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) row.push_back(e.S(i, j));
    row.insert(row.end(), {e.u_hat, e.u_bar, e.w, e.s_bar, e.energy});
    t.rows.push_back(std::move(row));
  }
  return t;
}

NoSlipTrajectory noslip_trace_from_table(const Table& table, double g) {
  NoSlipTrajectory traj;
  traj.g = g;
  int n = 0;
  while (n < 4 && has_column(table, std::string("x") + kAxis[n])) ++n;
  if (n < 2) fail(ErrorKind::Parse, "trace has no position columns");
  traj.dim = n;
  const int ct = column(table, "t"), ci = column(table, "event_index"), cx = column(table, "x1"),
            cu = column(table, "u1"), cs = cu + n, cuh = column(table, "u_hat");
  for (const auto& row : table.rows) {
    NoSlipEvent e;
    e.t = row[ct];
    e.index = static_cast<int>(row[ci]);
    e.x = VecX(n);
    e.u = VecX(n);
    e.S = MatX::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      e.x[i] = row[cx + i];
      e.u[i] = row[cu + i];
    }
    int k = cs;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        e.S(i, j) = row[k];
        e.S(j, i) = -row[k];
        ++k;
      }
    e.u_hat = row[cuh];
    e.u_bar = row[cuh + 1];
    e.w = row[cuh + 2];
    e.s_bar = row[cuh + 3];
    e.energy = row[cuh + 4];
    traj.events.push_back(std::move(e));
  }
  return traj;
}

void write_trace(const NoSlipTrajectory& traj, const std::string& config_json, const std::filesystem::path& path) {
  const json summary = {{"termination", to_string(traj.termination)}, {"message", traj.message}, {"g", traj.g}};
  write_csv(path, noslip_trace_table(traj), config_json, summary.dump());
}

NoSlipTrajectory read_trace(const std::filesystem::path& path) {
  const CsvDocument doc = read_csv(path);
  double g = 0.0;
  std::string term = "completed", message;
  if (!doc.summary.empty()) {
    try {
      const json s = json::parse(doc.summary);
      g = s.value("g", 0.0);
      term = s.value("termination", term);
      message = s.value("message", message);
    } catch (const json::exception& e) {
      fail(ErrorKind::Parse, path.string() + ": bad summary line: " + e.what());
    }
  }
  NoSlipTrajectory traj = noslip_trace_from_table(doc.table, g);
  for (auto k : {Termination::Completed, Termination::Horizon, Termination::Corner, Termination::Grazing,
                 Termination::Timeout})
    if (to_string(k) == term) traj.termination = k;
  traj.message = message;
  return traj;
}

Table roll4d_trace_table(const RollTrajectory& traj, double g) {
  Table t;
  t.columns = {"t",  "region", "loop", "s",   "phi", "x3",  "p1", "p2", "v1",
               "v2", "v3",     "S12",  "S13", "S23", "E1",  "E2", "E",  "E_g"};
  for (const auto& smp : traj.samples) {
    const RollState& st = smp.state;
    const Energies e = energy_monitor(st, g);
    t.rows.push_back({smp.t, static_cast<double>(region_code(st.region)), static_cast<double>(st.loop), st.s, st.phi,
                      st.x3, st.p.x(), st.p.y(), st.v.x(), st.v.y(), st.v.z(), st.spin.x(), st.spin.y(),
                      st.spin.z(), e.e1, e.e2, e.total, e.with_gravity});
  }
  return t;
}

std::vector<RollSample> roll4d_samples_from_table(const Table& table) {
  const int c0 = column(table, "t");
  const int cr = column(table, "region");
  const int cl = column(table, "loop");
  const int cs = column(table, "s");
  std::vector<RollSample> out;
  for (const auto& row : table.rows) {
    RollSample smp;
    smp.t = row[c0];
    const int code = static_cast<int>(row[cr]);
    smp.state.region = code > 0 ? Region::FlatPlus : code < 0 ? Region::FlatMinus : Region::Curved;
    smp.state.loop = static_cast<int>(row[cl]);
    smp.state.s = row[cs];
    smp.state.phi = row[cs + 1];
    smp.state.x3 = row[cs + 2];
    smp.state.p = {row[cs + 3], row[cs + 4]};
    smp.state.v = {row[cs + 5], row[cs + 6], row[cs + 7]};
    smp.state.spin = {row[cs + 8], row[cs + 9], row[cs + 10]};
    out.push_back(smp);
  }
  return out;
}

Table roll3d_trace_table(const std::vector<Roll3DSample>& samples, double g) {
  Table t;
  t.columns = {"t", "pos", "height", "v2", "s", "kappa", "E"};
  for (const auto& smp : samples) {
    const auto& st = smp.state;
    t.rows.push_back({smp.t, st.pos, st.height, st.v2, st.s, smp.kappa,
                      0.5 * (st.v2 * st.v2 + st.s * st.s) + g * st.height});
  }
  return t;
}

// --- SVG --------------------------------------------------------------------------------

namespace {

constexpr double kW = 740, kH = 450, kL = 90, kR = 130, kT = 40, kB = 50;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else if (c == '&') out += "&amp;";
    else out += c;
  }
  return out;
}

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); }
  double py(double y) const { return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB); }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1.0, std::abs(lo)) * 0.5;
    lo -= pad;
    hi += pad;
  }
}

std::string axes(const Frame& f, const std::string& xl, const std::string& yl, const std::string& title) {
  std::ostringstream s;
  s << "<rect x='" << kL << "' y='" << kT << "' width='" << kW - kL - kR << "' height='" << kH - kT - kB
    << "' fill='none' stroke='#333'/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0, yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s << "<text x='" << f.px(xv) << "' y='" << kH - kB + 18 << "' font-size='11' text-anchor='middle'>" << fmt(xv)
      << "</text>\n";
    s << "<text x='" << kL - 6 << "' y='" << f.py(yv) + 4 << "' font-size='11' text-anchor='end'>" << fmt(yv)
      << "</text>\n";
  }
  s << "<text x='" << (kL + kW - kR) / 2 << "' y='" << kH - 10 << "' font-size='13' text-anchor='middle'>"
    << escape(xl) << "</text>\n";
  s << "<text x='16' y='" << (kT + kH - kB) / 2 << "' font-size='13' text-anchor='middle' transform='rotate(-90 16 "
    << (kT + kH - kB) / 2 << ")'>" << escape(yl) << "</text>\n";
  if (!title.empty())
    s << "<text x='" << kW / 2 << "' y='24' font-size='14' text-anchor='middle'>" << escape(title) << "</text>\n";
  return s.str();
}

std::string open_svg() {
  std::ostringstream s;
  s << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH << "' viewBox='0 0 " << kW
    << " " << kH << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  return s.str();
}

// Piecewise-linear ramp from dark blue through green to yellow.
std::string ramp(double u) {
  static const double stops[][3] = {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  u = std::clamp(u, 0.0, 1.0) * 4.0;
  const int i = std::min(3, static_cast<int>(u));
  const double a = u - i;
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(stops[i][0] + a * (stops[i + 1][0] - stops[i][0])),
                static_cast<int>(stops[i][1] + a * (stops[i + 1][1] - stops[i][1])),
                static_cast<int>(stops[i][2] + a * (stops[i + 1][2] - stops[i][2])));
  return buf;
}

}  // namespace

std::string svg_lines(const Table& table, const std::string& x, const std::string& y, const std::string& group,
                      const std::string& title) {
  const int cx = column(table, x), cy = column(table, y);
  const int cg = group.empty() ? -1 : column(table, group);
  std::map<double, std::vector<std::pair<double, double>>> lines;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& row : table.rows) {
    if (!std::isfinite(row[cx]) || !std::isfinite(row[cy])) continue;
    lines[cg < 0 ? 0.0 : row[cg]].push_back({row[cx], row[cy]});
    x0 = std::min(x0, row[cx]);
    x1 = std::max(x1, row[cx]);
    y0 = std::min(y0, row[cy]);
    y1 = std::max(y1, row[cy]);
  }
  if (lines.empty()) x0 = y0 = 0.0, x1 = y1 = 1.0;
  widen(x0, x1);
  widen(y0, y1);
  const Frame f{x0, x1, y0, y1};
  std::ostringstream s;
  s << open_svg() << axes(f, x, y, title);
  int k = 0;
  for (const auto& [key, pts] : lines) {
    const char* color = kPalette[k % 10];
    s << "<polyline fill='none' stroke='" << color << "' stroke-width='1.2' points='";
    // Thin very long series to keep files small.
    const std::size_t stride = std::max<std::size_t>(1, pts.size() / 4000);
    for (std::size_t i = 0; i < pts.size(); i += stride) s << fmt(f.px(pts[i].first)) << "," << fmt(f.py(pts[i].second)) << " ";
    s << "'/>\n";
    if (cg >= 0) {
      const double ly = kT + 16 + 18 * k;
      s << "<line x1='" << kW - kR + 10 << "' y1='" << ly << "' x2='" << kW - kR + 30 << "' y2='" << ly
        << "' stroke='" << color << "' stroke-width='2'/>\n";
      s << "<text x='" << kW - kR + 36 << "' y='" << ly + 4 << "' font-size='11'>" << escape(group) << " = "
        << fmt(key) << "</text>\n";
    }
    ++k;
  }
  s << "</svg>\n";
  return s.str();
}

std::string svg_heatmap(const Table& table, const std::string& x, const std::string& y, const std::string& value,
                        const std::string& title) {
  const int cx = column(table, x), cy = column(table, y), cv = column(table, value);
  std::vector<double> xs, ys;
  double v0 = INFINITY, v1 = -INFINITY;
  for (const auto& row : table.rows) {
    xs.push_back(row[cx]);
    ys.push_back(row[cy]);
    if (std::isfinite(row[cv]) && row[cv] > 0.0) {
      v0 = std::min(v0, row[cv]);
      v1 = std::max(v1, row[cv]);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  if (xs.empty() || ys.empty()) return open_svg() + "</svg>\n";
  const double dx = xs.size() > 1 ? (xs.back() - xs.front()) / (xs.size() - 1) : 1.0;
  const double dy = ys.size() > 1 ? (ys.back() - ys.front()) / (ys.size() - 1) : 1.0;
  const Frame f{xs.front() - dx / 2, xs.back() + dx / 2, ys.front() - dy / 2, ys.back() + dy / 2};
  std::ostringstream s;
  s << open_svg();
  const double cw = f.px(f.x0 + dx) - f.px(f.x0), ch = f.py(f.y0) - f.py(f.y0 + dy);
  for (const auto& row : table.rows) {
    const double v = row[cv];
    const std::string color = std::isfinite(v) && v > 0.0 ? ramp(v1 > v0 ? (v - v0) / (v1 - v0) : 0.5) : "#dddddd";
    s << "<rect x='" << fmt(f.px(row[cx] - dx / 2)) << "' y='" << fmt(f.py(row[cy] + dy / 2)) << "' width='"
      << fmt(cw + 0.3) << "' height='" << fmt(ch + 0.3) << "' fill='" << color << "'/>\n";
  }
  s << axes(f, x, y, title);
  const double bh = (kH - kT - kB) / 10.0;
  for (int i = 0; i < 10; ++i)
    s << "<rect x='" << kW - kR + 20 << "' y='" << fmt(kH - kB - (i + 1) * bh) << "' width='18' height='"
      << fmt(bh + 0.5) << "' fill='" << ramp((i + 0.5) / 10.0) << "'/>\n";
  if (std::isfinite(v0)) {
    s << "<text x='" << kW - kR + 44 << "' y='" << kH - kB << "' font-size='11'>" << fmt(v0) << "</text>\n";
    s << "<text x='" << kW - kR + 44 << "' y='" << kT + 10 << "' font-size='11'>" << fmt(v1) << "</text>\n";
  }
  s << "<text x='" << kW - kR + 20 << "' y='" << kT - 10 << "' font-size='12'>" << escape(value) << "</text>\n";
  s << "</svg>\n";
  return s.str();
}

std::string svg_auto(const CsvDocument& doc, const std::string& title) {
  const Table& t = doc.table;
  if (t.columns.empty()) fail(ErrorKind::Parse, "cannot plot a table without columns");
  if (has_column(t, "dwell") && has_column(t, "v2") && has_column(t, "S12"))
    return svg_heatmap(t, "v2", "S12", "dwell", title);
  if (has_column(t, "event_index") && has_column(t, "x1") && has_column(t, "x2"))
    return svg_lines(t, "x1", "x2", {}, title);
  if (has_column(t, "t") && has_column(t, "x3"))
    return svg_lines(t, "t", "x3", t.columns[0] != "t" ? t.columns[0] : std::string(), title);
  if (has_column(t, "t") && has_column(t, "height")) return svg_lines(t, "t", "height", {}, title);
  if (t.columns.size() < 2) fail(ErrorKind::Parse, "cannot plot a single column");
  return svg_lines(t, t.columns[0], t.columns[1], {}, title);
}

}  // namespace nhb
