#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ios>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mdr/grid.hpp"
#include "mdr/reach.hpp"
#include "mdr/solver.hpp"
#include "mdr/value.hpp"

namespace mdr {

inline std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

/// FNV-1a over the canonical grid description; reports carry it so a solve
/// can be re-run against the exact same discretization.
inline std::uint64_t grid_hash(const GridSpec& grid) {
  std::ostringstream os;
  os << grid.dim();
  for (int j = 0; j < grid.dim(); ++j)
    os << ';' << format_double(grid.lower(j)) << ';' << format_double(grid.upper(j))
       << ';' << grid.nodes(j) << ';' << (grid.periodic(j) ? 1 : 0);
  const std::string s = os.str();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string grid_hash_hex(const GridSpec& grid) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << grid_hash(grid);
  return os.str();
}

// ---------------------------------------------------------------------------
// Value dump: one textual header line (dims, bounds, counts, periodic flags)
// followed by the raw little-endian float64 payload in row-major node order.
// ---------------------------------------------------------------------------

namespace detail {

inline bool host_little_endian() {
  const std::uint16_t probe = 1;
  std::uint8_t b;
  std::memcpy(&b, &probe, 1);
  return b == 1;
}

inline void write_le_doubles(std::ostream& os, const std::vector<double>& v) {
  if (host_little_endian()) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
    return;
  }
  for (double d : v) {
    std::uint64_t bits;
    std::memcpy(&bits, &d, 8);
    char buf[8];
    for (int k = 0; k < 8; ++k) buf[k] = static_cast<char>((bits >> (8 * k)) & 0xff);
    os.write(buf, 8);
  }
}

inline void read_le_doubles(std::istream& is, std::vector<double>& v) {
  if (host_little_endian()) {
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    return;
  }
  for (double& d : v) {
    char buf[8];
    is.read(buf, 8);
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k)
      bits |= std::uint64_t(static_cast<unsigned char>(buf[k])) << (8 * k);
    std::memcpy(&d, &bits, 8);
  }
}

}  // namespace detail

inline void write_values(const std::filesystem::path& path, const GridSpec& grid,
                         const ValueVector& values) {
  if (values.size() != grid.size())
    throw std::invalid_argument("write_values: value vector length mismatch");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_values: cannot open " + path.string());
  os << "mdr-values dim " << grid.dim() << " lower";
  for (int j = 0; j < grid.dim(); ++j) os << ' ' << format_double(grid.lower(j));
  os << " upper";
  for (int j = 0; j < grid.dim(); ++j) os << ' ' << format_double(grid.upper(j));
  os << " nodes";
  for (int j = 0; j < grid.dim(); ++j) os << ' ' << grid.nodes(j);
  os << " periodic";
  for (int j = 0; j < grid.dim(); ++j) os << ' ' << (grid.periodic(j) ? 1 : 0);
  os << '\n';
  detail::write_le_doubles(os, values.v);
  if (!os) throw std::runtime_error("write_values: write failed for " + path.string());
}

struct ValueDump {
  GridSpec grid;
  ValueVector values;
};

inline ValueDump read_values(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_values: cannot open " + path.string());
  std::string header;
  std::getline(is, header);
  std::istringstream hs(header);
  std::string magic, tok;
  int dim = 0;
  hs >> magic >> tok >> dim;
  if (magic != "mdr-values" || tok != "dim" || dim < 1 || dim > kMaxDim)
    throw std::runtime_error("read_values: bad header in " + path.string());
  std::vector<double> lower(dim), upper(dim);
  std::vector<int> nodes(dim);
  std::vector<std::uint8_t> periodic(dim);
  hs >> tok;
  for (int j = 0; j < dim; ++j) hs >> lower[j];
  hs >> tok;
  for (int j = 0; j < dim; ++j) hs >> upper[j];
  hs >> tok;
  for (int j = 0; j < dim; ++j) hs >> nodes[j];
  hs >> tok;
  for (int j = 0; j < dim; ++j) {
    int p;
    hs >> p;
    periodic[j] = p ? 1 : 0;
  }
  if (!hs) throw std::runtime_error("read_values: truncated header in " + path.string());
  GridSpec grid(lower, upper, nodes, periodic);
  ValueVector values(grid.size(), 0.0);
  detail::read_le_doubles(is, values.v);
  if (!is) throw std::runtime_error("read_values: truncated payload in " + path.string());
  return {std::move(grid), std::move(values)};
}

// ---------------------------------------------------------------------------
// Structured text report.
// ---------------------------------------------------------------------------

struct ReportMeta {
  std::string problem;  // mr | mdr | sdr
  std::string method;   // vi | pi | multigrid | warmstart
  double lambda = 0.0;
  double gamma = 1.0;
  double dt = 0.0;
  double L = 0.0;
  double epsilon = 0.0;
};

inline std::string format_report(const ReportMeta& meta, const GridSpec& grid,
                                 const SolveReport& report) {
  std::ostringstream os;
  os << "mdr-report\n";
  os << "problem = " << meta.problem << '\n';
  os << "method = " << meta.method << '\n';
  os << "grid_nodes =";
  for (int j = 0; j < grid.dim(); ++j) os << ' ' << grid.nodes(j);
  os << '\n';
  os << "grid_lower =";
  for (int j = 0; j < grid.dim(); ++j) os << ' ' << format_double(grid.lower(j));
  os << '\n';
  os << "grid_upper =";
  for (int j = 0; j < grid.dim(); ++j) os << ' ' << format_double(grid.upper(j));
  os << '\n';
  os << "grid_periodic =";
  for (int j = 0; j < grid.dim(); ++j) os << ' ' << (grid.periodic(j) ? 1 : 0);
  os << '\n';
  os << "grid_hash = " << grid_hash_hex(grid) << '\n';
  os << "lambda = " << format_double(meta.lambda) << '\n';
  os << "gamma = " << format_double(meta.gamma) << '\n';
  os << "dt = " << format_double(meta.dt) << '\n';
  os << "L = " << format_double(meta.L) << '\n';
  os << "epsilon = " << format_double(meta.epsilon) << '\n';
  os << "init = " << report.init_provenance << '\n';
  os << "iterations = " << report.iterations << '\n';
  os << "converged = " << (report.converged ? "true" : "false") << '\n';
  os << "wall_time_s = " << format_double(report.wall_time_s) << '\n';
  os << "residuals =";
  for (double r : report.residuals) os << ' ' << format_double(r);
  os << '\n';
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_text: cannot open " + path.string());
  os << text;
}

// ---------------------------------------------------------------------------
// CSV exports.
// ---------------------------------------------------------------------------

/// x,y per vertex, blank line between polylines.
inline void write_contours_csv(const std::filesystem::path& path,
                               const std::vector<Polyline>& polylines) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_contours_csv: cannot open " + path.string());
  bool first = true;
  for (const auto& pl : polylines) {
    if (!first) os << '\n';
    first = false;
    for (const auto& p : pl.points)
      os << format_double(p[0]) << ',' << format_double(p[1]) << '\n';
  }
}

inline void write_learning_curve_csv(const std::filesystem::path& path,
                                     const std::vector<double>& curve) {
  std::ofstream os(path, std::ios::binary);
  if (!os)
    throw std::runtime_error("write_learning_curve_csv: cannot open " + path.string());
  os << "epoch,gap\n";
  for (std::size_t k = 0; k < curve.size(); ++k)
    os << k + 1 << ',' << format_double(curve[k]) << '\n';
}

// ---------------------------------------------------------------------------
// SVG export: contour layers over the domain rectangle.
// ---------------------------------------------------------------------------

struct SvgStyle {
  std::string stroke = "#000000";
  double stroke_width = 1.5;
  std::string dasharray;  // empty = solid
  std::string label;
};

struct SvgLayer {
  std::vector<Polyline> polylines;
  SvgStyle style;
};

inline void write_svg(const std::filesystem::path& path, double x_min, double x_max,
                      double y_min, double y_max, const std::vector<SvgLayer>& layers,
                      int width_px = 640) {
  const double span_x = x_max - x_min;
  const double span_y = y_max - y_min;
  if (!(span_x > 0.0) || !(span_y > 0.0))
    throw std::invalid_argument("write_svg: empty domain");
  const int height_px = static_cast<int>(width_px * span_y / span_x + 0.5);
  const double margin = 10.0;
  const double sx = (width_px - 2 * margin) / span_x;
  const double sy = (height_px - 2 * margin) / span_y;
  auto px = [&](double x) { return margin + (x - x_min) * sx; };
  auto py = [&](double y) { return height_px - margin - (y - y_min) * sy; };

  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_svg: cannot open " + path.string());
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_px
     << "\" height=\"" << height_px << "\" viewBox=\"0 0 " << width_px << ' '
     << height_px << "\">\n";
  os << "  <rect x=\"" << margin << "\" y=\"" << margin << "\" width=\""
     << width_px - 2 * margin << "\" height=\"" << height_px - 2 * margin
     << "\" fill=\"none\" stroke=\"#999999\" stroke-width=\"0.5\"/>\n";
  for (const auto& layer : layers) {
    os << "  <g fill=\"none\" stroke=\"" << layer.style.stroke << "\" stroke-width=\""
       << layer.style.stroke_width << '"';
    if (!layer.style.dasharray.empty())
      os << " stroke-dasharray=\"" << layer.style.dasharray << '"';
    if (!layer.style.label.empty()) os << " data-label=\"" << layer.style.label << '"';
    os << ">\n";
    for (const auto& pl : layer.polylines) {
      if (pl.points.size() < 2) continue;
      os << "    <polyline points=\"";
      for (std::size_t k = 0; k < pl.points.size(); ++k) {
        if (k) os << ' ';
        os << px(pl.points[k][0]) << ',' << py(pl.points[k][1]);
      }
      os << "\"/>\n";
    }
    os << "  </g>\n";
  }
  os << "</svg>\n";
}

}  // namespace mdr
