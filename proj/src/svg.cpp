#include "dosm/svg.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

namespace dosm::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kPanelHeight = 320.0;
constexpr double kLeft = 80.0, kRight = 20.0, kTop = 36.0, kBottom = 52.0;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

struct Axis {
  double lo = 0.0, hi = 1.0;
  bool log = false;
  double map(double v, double a, double b) const {
    const double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    return a + t * (b - a);
  }
  std::vector<double> ticks() const {
    std::vector<double> out;
    if (log) {
      for (double e = std::floor(lo); e <= std::ceil(hi); e += 1.0)
        if (e >= lo - 1e-9 && e <= hi + 1e-9) out.push_back(std::pow(10.0, e));
      if (out.size() < 2) out = {std::pow(10.0, lo), std::pow(10.0, hi)};
      return out;
    }
    for (int k = 0; k <= 4; ++k) out.push_back(lo + (hi - lo) * k / 4.0);
    return out;
  }
};

Axis make_axis(std::vector<double> vals, bool log) {
  Axis a;
  a.log = log;
  if (log)
    for (auto& v : vals) v = std::log10(v);
  if (vals.empty()) return a;
  a.lo = *std::min_element(vals.begin(), vals.end());
  a.hi = *std::max_element(vals.begin(), vals.end());
  if (a.hi - a.lo < 1e-12) {
    const double pad = log ? 0.5 : std::max(1.0, std::abs(a.lo) * 0.1);
    a.lo -= pad;
    a.hi += pad;
  }
  return a;
}

void draw_panel(std::ostringstream& os, const Panel& p, double y0) {
  const double x_a = kLeft, x_b = kWidth - kRight;
  const double y_a = y0 + kPanelHeight - kBottom, y_b = y0 + kTop;
  std::vector<double> xs, ys;
  int skipped = 0;
  for (const auto& s : p.series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if ((p.log_x && !(s.x[k] > 0)) || (p.log_y && !(s.y[k] > 0)) || !std::isfinite(s.x[k]) ||
          !std::isfinite(s.y[k])) {
        ++skipped;
        continue;
      }
      xs.push_back(s.x[k]);
      ys.push_back(s.y[k]);
    }
  const Axis ax = make_axis(xs, p.log_x), ay = make_axis(ys, p.log_y);

  os << "<g>\n<text x=\"" << kWidth / 2 << "\" y=\"" << y0 + 22
     << "\" text-anchor=\"middle\" font-size=\"15\">" << escape(p.title) << "</text>\n";
  os << "<rect x=\"" << x_a << "\" y=\"" << y_b << "\" width=\"" << x_b - x_a << "\" height=\""
     << y_a - y_b << "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (double t : ax.ticks()) {
    const double x = ax.map(t, x_a, x_b);
    os << "<line x1=\"" << x << "\" y1=\"" << y_a << "\" x2=\"" << x << "\" y2=\"" << y_a + 5
       << "\" stroke=\"#333\"/><text x=\"" << x << "\" y=\"" << y_a + 18
       << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(t) << "</text>\n";
  }
  for (double t : ay.ticks()) {
    const double y = ay.map(t, y_a, y_b);
    os << "<line x1=\"" << x_a - 5 << "\" y1=\"" << y << "\" x2=\"" << x_a << "\" y2=\"" << y
       << "\" stroke=\"#333\"/><text x=\"" << x_a - 8 << "\" y=\"" << y + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(t) << "</text>\n";
  }
  os << "<text x=\"" << (x_a + x_b) / 2 << "\" y=\"" << y_a + 40
     << "\" text-anchor=\"middle\" font-size=\"13\">" << escape(p.x_label) << "</text>\n";
  const double ymid = (y_a + y_b) / 2;
  os << "<text x=\"18\" y=\"" << ymid << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << ymid << ")\">" << escape(p.y_label) << "</text>\n";

  for (std::size_t si = 0; si < p.series.size(); ++si) {
    const auto& s = p.series[si];
    const char* color = kColors[si % (sizeof(kColors) / sizeof(kColors[0]))];
    std::ostringstream path;
    std::ostringstream dots;
    bool first = true;
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      if ((p.log_x && !(s.x[k] > 0)) || (p.log_y && !(s.y[k] > 0)) || !std::isfinite(s.x[k]) ||
          !std::isfinite(s.y[k]))
        continue;
      const double x = ax.map(s.x[k], x_a, x_b), y = ay.map(s.y[k], y_a, y_b);
      path << (first ? "M" : " L") << fmt(x) << ' ' << fmt(y);
      first = false;
      dots << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"2\" fill=\"" << color
           << "\"/>\n";
    }
    if (!first)
      os << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
         << "\" stroke-width=\"1.2\"/>\n";
    os << dots.str();
    os << "<text x=\"" << x_b - 6 << "\" y=\"" << y_b + 16 + 14 * static_cast<double>(si)
       << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">" << escape(s.label)
       << "</text>\n";
  }
  if (skipped > 0)
    os << "<text x=\"" << x_a + 6 << "\" y=\"" << y_b + 16 << "\" font-size=\"11\" fill=\"#666\">"
       << skipped << " nonpositive points not shown</text>\n";
  os << "</g>\n";
}

}  // namespace

std::string render(const std::vector<Panel>& panels, const std::string& caption) {
  const double extra = caption.empty() ? 0.0 : 24.0;
  const double height = kPanelHeight * static_cast<double>(std::max<std::size_t>(1, panels.size())) + extra;
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << height
     << "\" viewBox=\"0 0 " << kWidth << ' ' << height << "\" font-family=\"sans-serif\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!caption.empty())
    os << "<text x=\"8\" y=\"16\" font-size=\"11\" fill=\"#666\">" << escape(caption) << "</text>\n";
  for (std::size_t k = 0; k < panels.size(); ++k)
    draw_panel(os, panels[k], extra + kPanelHeight * static_cast<double>(k));
  os << "</svg>\n";
  return os.str();
}

std::vector<Panel> trace_panels(const eval::RegretTrace& trace) {
  std::map<long, std::pair<double, double>> regret;  // round -> (sum, count)
  std::map<long, double> consensus;
  for (const auto& row : trace.rows) {
    auto& r = regret[row.round];
    r.first += row.alpha_regret;
    r.second += 1.0;
    consensus[row.round] = std::max(consensus[row.round], row.consensus_err);
  }
  Series pos{"mean alpha-regret > 0", {}, {}}, neg{"|mean alpha-regret|, regret < 0", {}, {}};
  Series cons{"max over nodes", {}, {}};
  for (const auto& [t, r] : regret) {
    const double m = r.first / r.second;
    auto& s = m >= 0 ? pos : neg;
    s.x.push_back(static_cast<double>(t));
    s.y.push_back(std::abs(m));
  }
  for (const auto& [t, c] : consensus) {
    cons.x.push_back(static_cast<double>(t));
    cons.y.push_back(c);
  }
  Panel a{"alpha-regret (" + trace.algo + ", alpha = " + fmt(trace.alpha) + ")", "round t",
          "|mean alpha-regret|", true, true, {}};
  if (!pos.x.empty()) a.series.push_back(pos);
  if (!neg.x.empty()) a.series.push_back(neg);
  Panel b{"consensus error per round", "round t", "||x_t^i - mean_j x_t^j||", false, false, {cons}};
  return {a, b};
}

std::vector<Panel> sweep_panels(const std::vector<SweepRow>& rows) {
  Series s{"mean final alpha-regret", {}, {}};
  for (const auto& r : rows) {
    s.x.push_back(r.T);
    s.y.push_back(r.mean_final_regret);
  }
  return {Panel{"regret sweep", "horizon T", "mean final alpha-regret", true, true, {s}}};
}

int count_points(const std::string& svg) {
  int n = 0;
  for (std::size_t pos = svg.find("<circle"); pos != std::string::npos; pos = svg.find("<circle", pos + 1))
    ++n;
  return n;
}

}  // namespace dosm::svg
