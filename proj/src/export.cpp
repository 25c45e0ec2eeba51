#include "polyprune/export.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "polyprune/error.hpp"

namespace polyprune {

std::string fixed(double value, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  std::string s(buf);
  if (s[0] == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

void write_disks_header(std::ostream& out) { out << "day,plant_index,type_id,cx_cm,cy_cm,r_cm,tracker\n"; }

void write_disks_rows(std::ostream& out, const DiskSet& disks) {
  for (const auto& d : disks.disks) {
    out << disks.day << ',' << d.plant_index << ',' << d.type_id << ',' << fixed(d.center.x) << ','
        << fixed(d.center.y) << ',' << fixed(d.radius) << ',' << to_string(d.tracker) << '\n';
  }
}

std::vector<DiskSet> read_disks_csv(std::istream& in) {
  std::vector<DiskSet> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.rfind("day,", 0) == 0) continue;
    std::istringstream row(line);
    std::string f[7];
    for (auto& field : f) std::getline(row, field, ',');
    try {
      BoundingDisk d;
      const int day = std::stoi(f[0]);
      d.plant_index = std::stoi(f[1]);
      d.type_id = std::stoi(f[2]);
      d.center = {std::stod(f[3]), std::stod(f[4])};
      d.radius = std::stod(f[5]);
      d.tracker = f[6] == "kmeans" ? TrackerKind::KMeans : TrackerKind::Bfs;
      if (out.empty() || out.back().day != day) out.push_back({day, {}});
      if (d.plant_index != static_cast<int>(out.back().disks.size()))
        throw Error(ErrorCode::InvalidInput, "disk rows must list plants in index order");
      out.back().disks.push_back(d);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::InvalidInput, "bad disks row " + std::to_string(line_no));
    }
  }
  return out;
}

void write_servo_trace(std::ostream& out, const std::vector<ServoIteration>& trace) {
  out << "iteration,pose_x,pose_y,localized_x,localized_y,scale,score,step_len_cm\n";
  for (const auto& r : trace) {
    out << r.iteration << ',' << fixed(r.pose.x) << ',' << fixed(r.pose.y) << ',' << fixed(r.localized.x) << ','
        << fixed(r.localized.y) << ',' << fixed(r.scale, 2) << ',' << fixed(r.score) << ',' << fixed(r.step_len)
        << '\n';
  }
}

void write_prune_log_header(std::ostream& out) {
  out << "day,plant_index,point_x_cm,point_y_cm,chosen_neighbor,decay_rate_cm_per_day,method\n";
}

void write_prune_log_row(std::ostream& out, int day, int plant_index, Vec2 point, std::optional<int> neighbor,
                         double decay_rate, const std::string& method) {
  out << day << ',' << plant_index << ',' << fixed(point.x) << ',' << fixed(point.y) << ','
      << (neighbor ? std::to_string(*neighbor) : std::string()) << ',' << fixed(decay_rate) << ',' << method
      << '\n';
}

void write_tool_log_header(std::ostream& out) {
  out << "day,plant_index,tool,cut_angle_deg,depth_z_cm,removed_area_cm2,collateral_count\n";
}

void write_tool_log_row(std::ostream& out, int day, int plant_index, const ToolCommand& command,
                        const CutEffect& effect) {
  out << day << ',' << plant_index << ',' << to_string(command.tool) << ',' << fixed(command.cut_angle) << ','
      << fixed(command.depth_z) << ',' << fixed(effect.removed_area) << ',' << effect.collateral.size() << '\n';
}

std::string snapshot_records(const GardenState& state) {
  std::ostringstream out;
  for (std::size_t i = 0; i < state.plants.size(); ++i) {
    const auto& p = state.plants[i];
    if (i) out << ",\n";
    out << "  {\"day\": " << state.day << ", \"plant_index\": " << p.plant_index << ", \"type_id\": " << p.type_id
        << ", \"cx\": " << fixed(p.center.x) << ", \"cy\": " << fixed(p.center.y) << ", \"r\": " << fixed(p.radius)
        << ", \"stage\": \"" << to_string(p.stage) << "\"}";
  }
  return out.str();
}

std::string svg_line_chart(const std::string& title, const std::vector<int>& days,
                           const std::vector<std::pair<std::string, std::vector<double>>>& series) {
  constexpr double W = 640, H = 360, L = 50, R = 130, T = 30, B = 40;
  static const char* colors[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"};
  double hi = 0.0;
  for (const auto& s : series)
    for (double v : s.second) hi = std::max(hi, v);
  hi = hi > 0.0 ? hi * 1.05 : 1.0;
  const int d0 = days.empty() ? 0 : days.front();
  const int d1 = days.empty() ? 1 : std::max(days.back(), d0 + 1);
  auto px = [&](int d) { return L + (W - L - R) * (d - d0) / static_cast<double>(d1 - d0); };
  auto py = [&](double v) { return H - B - (H - T - B) * v / hi; };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << L << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = hi * k / 4.0;
    out << "<text x=\"" << L - 6 << "\" y=\"" << fixed(py(v) + 4, 1)
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << fixed(v, 2) << "</text>\n";
  }
  for (int d = d0; d <= d1; d += std::max(1, (d1 - d0) / 6)) {
    out << "<text x=\"" << fixed(px(d), 1) << "\" y=\"" << H - B + 14
        << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" << d << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* color = colors[s % std::size(colors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    const auto& vals = series[s].second;
    for (std::size_t i = 0; i < vals.size() && i < days.size(); ++i)
      out << (i ? " " : "") << fixed(px(days[i]), 1) << ',' << fixed(py(vals[i]), 1);
    out << "\"/>\n";
    out << "<text x=\"" << W - R + 8 << "\" y=\"" << T + 14 * (s + 1) << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << color << "\">" << series[s].first << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace polyprune
