// Copyright 2026 The gfmsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gfm/emit.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace gfm {

namespace {

// Shortest decimal form that parses back to the same double.
void append_number(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error(path + ": cannot open for writing");
  }
  return out;
}

void finish_write(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out.good()) {
    throw std::runtime_error(path + ": write failed");
  }
}

// ---------------------------------------------------------------------------
// Minimal SVG chart rendering: shared time axis, one or more labeled series
// per panel, panels stacked vertically in one document.

struct Series {
  const char* label;
  const char* color;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::string unit;
  std::vector<Series> series;
};

constexpr int kPlotWidth = 880;
constexpr int kPanelHeight = 260;
constexpr int kMarginLeft = 72;
constexpr int kMarginRight = 24;
constexpr int kMarginTop = 34;
constexpr int kMarginBottom = 40;

std::string format_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

void render_panel(std::ostringstream& svg, const Panel& panel,
                  const std::vector<double>& x, int y_offset) {
  const int x0 = kMarginLeft;
  const int x1 = kPlotWidth - kMarginRight;
  const int y0 = y_offset + kMarginTop;
  const int y1 = y_offset + kPanelHeight - kMarginBottom;

  double x_min = 0.0, x_max = 1.0;
  if (!x.empty()) {
    x_min = x.front();
    x_max = x.back();
  }
  if (x_max <= x_min) x_max = x_min + 1.0;

  double y_min = std::numeric_limits<double>::infinity();
  double y_max = -std::numeric_limits<double>::infinity();
  for (const Series& s : panel.series) {
    for (const double v : s.y) {
      if (!std::isfinite(v)) continue;
      y_min = std::min(y_min, v);
      y_max = std::max(y_max, v);
    }
  }
  if (!std::isfinite(y_min)) {
    y_min = -1.0;
    y_max = 1.0;
  }
  if (y_max - y_min < 1e-12) {
    y_min -= 1.0;
    y_max += 1.0;
  }
  const double pad = 0.05 * (y_max - y_min);
  y_min -= pad;
  y_max += pad;

  const auto sx = [&](double v) {
    return x0 + (v - x_min) / (x_max - x_min) * (x1 - x0);
  };
  const auto sy = [&](double v) {
    return y1 - (v - y_min) / (y_max - y_min) * (y1 - y0);
  };

  svg << "<text x=\"" << x0 << "\" y=\"" << y_offset + 20
      << "\" class=\"title\">" << panel.title << "</text>\n";
  svg << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << x1 - x0
      << "\" height=\"" << y1 - y0 << "\" class=\"frame\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double fy = y_min + (y_max - y_min) * i / 4.0;
    const double py = sy(fy);
    svg << "<line x1=\"" << x0 << "\" y1=\"" << py << "\" x2=\"" << x1
        << "\" y2=\"" << py << "\" class=\"grid\"/>\n";
    svg << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 4
        << "\" class=\"tick\" text-anchor=\"end\">" << format_tick(fy)
        << "</text>\n";
    const double fx = x_min + (x_max - x_min) * i / 4.0;
    const double px = sx(fx);
    svg << "<text x=\"" << px << "\" y=\"" << y1 + 16
        << "\" class=\"tick\" text-anchor=\"middle\">" << format_tick(fx)
        << "</text>\n";
  }
  svg << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << y1 + 32
      << "\" class=\"tick\" text-anchor=\"middle\">t (s)</text>\n";
  if (!panel.unit.empty()) {
    svg << "<text x=\"" << x0 - 58 << "\" y=\"" << (y0 + y1) / 2
        << "\" class=\"tick\" transform=\"rotate(-90 " << x0 - 58 << " "
        << (y0 + y1) / 2 << ")\" text-anchor=\"middle\">" << panel.unit
        << "</text>\n";
  }

  int legend_x = x0 + 8;
  for (const Series& s : panel.series) {
    svg << "<polyline fill=\"none\" stroke=\"" << s.color
        << "\" stroke-width=\"1.2\" points=\"";
    bool pending_move = true;
    for (size_t i = 0; i < s.y.size() && i < x.size(); ++i) {
      if (!std::isfinite(s.y[i])) {
        pending_move = true;
        continue;
      }
      if (!pending_move) svg << ' ';
      svg << format_tick(sx(x[i])) << ',' << format_tick(sy(s.y[i]));
      pending_move = false;
    }
    svg << "\"/>\n";
    svg << "<text x=\"" << legend_x << "\" y=\"" << y0 + 14
        << "\" class=\"legend\" fill=\"" << s.color << "\">" << s.label
        << "</text>\n";
    legend_x += 14 + 8 * static_cast<int>(std::string(s.label).size());
  }
}

void write_chart(const std::string& path, const std::vector<double>& x,
                 const std::vector<Panel>& panels) {
  std::ostringstream svg;
  const int height = kPanelHeight * static_cast<int>(panels.size());
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kPlotWidth
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << kPlotWidth << " "
      << height << "\">\n";
  svg << "<style>text{font-family:sans-serif}.title{font-size:14px;"
         "font-weight:bold}.tick{font-size:11px;fill:#444}.legend{font-size:"
         "12px}.frame{fill:none;stroke:#222}.grid{stroke:#ddd}</style>\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  int offset = 0;
  for (const Panel& panel : panels) {
    render_panel(svg, panel, x, offset);
    offset += kPanelHeight;
  }
  svg << "</svg>\n";

  std::ofstream out = open_for_write(path);
  out << svg.str();
  finish_write(out, path);
}

}  // namespace

void emit_csv(const std::vector<SimRecord>& records, const std::string& path) {
  std::string body;
  body.reserve(records.size() * 220 + 256);
  body += kCsvHeader;
  body += '\n';
  for (const SimRecord& r : records) {
    const double columns[] = {
        r.t,          r.v_pcc.a,     r.v_pcc.b,   r.v_pcc.c, r.i_f.a,
        r.i_f.b,      r.i_f.c,       r.i_line.a,  r.i_line.b, r.i_line.c,
        r.p,          r.q,           r.omega_c,   r.theta_c, r.i_d_ref,
        r.i_q_ref,    r.i_d_ref_sat, r.i_q_ref_sat};
    for (const double c : columns) {
      append_number(body, c);
      body += ',';
    }
    body += r.enable ? '1' : '0';
    const double tail[] = {r.phi_conventional, r.phi_flux, r.psi_cd,
                           r.psi_cq,           r.psi_gd,   r.psi_gq};
    for (const double c : tail) {
      body += ',';
      append_number(body, c);
    }
    body += '\n';
  }

  std::ofstream out = open_for_write(path);
  out << body;
  finish_write(out, path);
}

void emit_svg_plots(const std::vector<SimRecord>& records,
                    const std::string& path_prefix) {
  std::vector<double> t;
  t.reserve(records.size());
  for (const SimRecord& r : records) t.push_back(r.t);

  const auto column = [&](auto getter) {
    std::vector<double> y;
    y.reserve(records.size());
    for (const SimRecord& r : records) y.push_back(getter(r));
    return y;
  };

  {
    Panel voltages{"PCC phase voltages", "V", {}};
    voltages.series.push_back(
        {"v_a", "#1f77b4", column([](const SimRecord& r) { return r.v_pcc.a; })});
    voltages.series.push_back(
        {"v_b", "#ff7f0e", column([](const SimRecord& r) { return r.v_pcc.b; })});
    voltages.series.push_back(
        {"v_c", "#2ca02c", column([](const SimRecord& r) { return r.v_pcc.c; })});
    Panel currents{"Converter filter currents", "A", {}};
    currents.series.push_back(
        {"i_a", "#1f77b4", column([](const SimRecord& r) { return r.i_f.a; })});
    currents.series.push_back(
        {"i_b", "#ff7f0e", column([](const SimRecord& r) { return r.i_f.b; })});
    currents.series.push_back(
        {"i_c", "#2ca02c", column([](const SimRecord& r) { return r.i_f.c; })});
    write_chart(path_prefix + "_overview.svg", t, {voltages, currents});
  }
  {
    // Measured currents in the controller frame next to the limited
    // references they are asked to track.
    std::vector<double> i_d, i_q;
    i_d.reserve(records.size());
    i_q.reserve(records.size());
    for (const SimRecord& r : records) {
      Angle theta;
      theta.rad = r.theta_c;
      const DqPair dq = park(clarke(r.i_f), theta);
      i_d.push_back(dq.d);
      i_q.push_back(dq.q);
    }
    Panel panel{"dq currents vs limited references", "A", {}};
    panel.series.push_back({"i_d", "#1f77b4", i_d});
    panel.series.push_back({"i_q", "#ff7f0e", i_q});
    panel.series.push_back({"i_d_ref_sat", "#2ca02c",
                            column([](const SimRecord& r) {
                              return r.i_d_ref_sat;
                            })});
    panel.series.push_back({"i_q_ref_sat", "#d62728",
                            column([](const SimRecord& r) {
                              return r.i_q_ref_sat;
                            })});
    write_chart(path_prefix + "_dq_currents.svg", t, {panel});
  }
  {
    Panel power{"Active power", "W", {}};
    power.series.push_back(
        {"P", "#1f77b4", column([](const SimRecord& r) { return r.p; })});
    Panel freq{"Droop frequency", "rad/s", {}};
    freq.series.push_back(
        {"omega_c", "#d62728",
         column([](const SimRecord& r) { return r.omega_c; })});
    write_chart(path_prefix + "_power_freq.svg", t, {power, freq});
  }
  {
    Panel panel{"Current phase angle estimates", "rad", {}};
    panel.series.push_back({"phi_conventional", "#1f77b4",
                            column([](const SimRecord& r) {
                              return r.phi_conventional;
                            })});
    panel.series.push_back({"phi_flux", "#d62728",
                            column([](const SimRecord& r) {
                              return r.phi_flux;
                            })});
    write_chart(path_prefix + "_angles.svg", t, {panel});
  }
}

void emit_report(const ScenarioConfig& cfg, const RunMetrics& metrics,
                 const RunExtras& extras, const std::string& path) {
  nlohmann::json doc;
  doc["scenario"] = {
      {"strategy", to_string(cfg.control.strategy)},
      {"fault_kind", to_string(cfg.fault.kind)},
      {"fault_start", cfg.fault.start},
      {"fault_duration", cfg.fault.duration},
      {"t_end", cfg.t_end},
      {"dt_plant", cfg.dt_plant},
      {"dt_ctrl", cfg.dt_ctrl},
      {"i_max_sat", cfg.control.i_max_sat},
  };
  doc["metrics"] = {
      {"peak_phase_current", metrics.peak_phase_current},
      {"current_limit_violated", metrics.current_limit_violated},
      {"sync_lost", metrics.sync_lost},
      {"diverged", metrics.diverged},
  };
  if (metrics.recovery_time.has_value()) {
    doc["metrics"]["recovery_time"] = *metrics.recovery_time;
  } else {
    doc["metrics"]["recovery_time"] = nullptr;
  }
  doc["smoothness"] = {
      {"max_phi_step_conventional", extras.max_phi_step_conventional},
      {"max_phi_step_flux", extras.max_phi_step_flux},
  };
  doc["fault_window_peaks"] = {
      {"first_10ms", extras.peak_current_fault_early},
      {"after_10ms", extras.peak_current_fault_late},
  };
  doc["exit_code"] = exit_code_for(metrics);

  std::ofstream out = open_for_write(path);
  out << doc.dump(2) << '\n';
  finish_write(out, path);
}

std::string render_comparison_table(
    const std::vector<StrategyComparison>& rows) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %10s %6s %6s %10s %5s %12s %12s\n",
                "strategy", "peak_i_f", "limit", "sync", "recovery", "divg",
                "dphi_conv", "dphi_flux");
  out += line;
  for (const StrategyComparison& row : rows) {
    char recovery[32];
    if (row.metrics.recovery_time.has_value()) {
      std::snprintf(recovery, sizeof(recovery), "%.3fs",
                    *row.metrics.recovery_time);
    } else {
      std::snprintf(recovery, sizeof(recovery), "-");
    }
    std::snprintf(line, sizeof(line),
                  "%-14s %9.2fA %6s %6s %10s %5s %12.5g %12.5g\n",
                  to_string(row.strategy), row.metrics.peak_phase_current,
                  row.metrics.current_limit_violated ? "VIOL" : "ok",
                  row.metrics.sync_lost ? "LOST" : "ok", recovery,
                  row.metrics.diverged ? "yes" : "no",
                  row.extras.max_phi_step_conventional,
                  row.extras.max_phi_step_flux);
    out += line;
  }
  return out;
}

}  // namespace gfm
