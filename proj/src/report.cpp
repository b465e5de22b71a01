#include "stamp/report.hpp"

#include "stamp/errors.hpp"
#include "stamp/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace stamp {

namespace {

// Posterior-mean rate multiplier per team for one (season, area, side,
// shot type) slice.
std::vector<double> slice_rates(const PosteriorFit& fit, int season, int area,
                                Side side, ShotType k, bool side_scaling) {
  const LatentLayout& lay = fit.layout;
  const int I = lay.num_teams;
  const Eigen::Index j_draws = fit.samples.rows();
  std::vector<double> rates(static_cast<std::size_t>(I), 0.0);
  for (int i = 0; i < I; ++i) {
    double acc = 0.0;
    for (Eigen::Index j = 0; j < j_draws; ++j) {
      double contrib = fit.samples(j, lay.w(i, area, season));
      for (int m = 0; m < kNumSlopeKinds; ++m) {
        SlopeKind kind = static_cast<SlopeKind>(m);
        if (!lay.has_slope(kind) || slope_shot_type(kind) != k)
          continue;
        contrib += slope_is_team_area(kind)
                       ? fit.samples(j, lay.slope_ias(kind, i, area, season))
                       : fit.samples(j, lay.slope_is(kind, i, season));
      }
      if (side_scaling && lay.z_offset >= 0)
        contrib += fit.samples(j, lay.z(i, side, season));
      acc += std::exp(contrib);
    }
    rates[static_cast<std::size_t>(i)] = acc / static_cast<double>(j_draws);
  }
  return rates;
}

double midrank_percentile(const std::vector<double>& values, std::size_t who) {
  double below = 0.0, ties = 0.0;
  for (double v : values) {
    if (v < values[who])
      below += 1.0;
    else if (v == values[who])
      ties += 1.0;
  }
  double rank = below + 0.5 * (ties + 1.0); // midrank, 1-based
  return 100.0 * (rank - 0.5) / static_cast<double>(values.size());
}

} // namespace

PercentileMap percentile_map(const PosteriorFit& fit, const std::string& team,
                             const std::string& season, ShotType shot_type,
                             bool side_scaling) {
  if (fit.layout.w_offset < 0)
    throw ComponentMissing("percentile map requires team x area effects (use_ta)");
  const int i = fit.index.team_id(team);
  const int s = fit.index.season_id(season);

  PercentileMap map;
  map.team = team;
  map.season = season;
  map.shot_type = shot_type;
  map.side_scaling = side_scaling && fit.layout.z_offset >= 0;

  const auto& pairs = AreaPartition::instance().valid_pairs();
  for (std::size_t ad = 0; ad < pairs.size(); ++ad) {
    auto [area, side] = pairs[ad];
    std::vector<double> rates =
        slice_rates(fit, s, area, side, shot_type, map.side_scaling);
    map.rate[ad] = rates[static_cast<std::size_t>(i)];
    map.percentile[ad] = midrank_percentile(rates, static_cast<std::size_t>(i));
  }
  return map;
}

std::vector<LrBiasRow> lr_bias(const PosteriorFit& fit) {
  const LatentLayout& lay = fit.layout;
  if (lay.z_offset < 0)
    throw ComponentMissing("left-right bias requires team x side effects (use_ts)");
  const int I = lay.num_teams;
  const int S = lay.num_seasons;
  const Eigen::Index j_draws = fit.samples.rows();

  std::vector<LrBiasRow> rows(static_cast<std::size_t>(I));
  for (int i = 0; i < I; ++i) {
    std::vector<double> per_sample(static_cast<std::size_t>(j_draws));
    for (Eigen::Index j = 0; j < j_draws; ++j) {
      double acc = 0.0;
      for (int s = 0; s < S; ++s)
        acc += fit.samples(j, lay.z(i, Side::Right, s)) -
               fit.samples(j, lay.z(i, Side::Left, s));
      per_sample[static_cast<std::size_t>(j)] = acc / S;
    }
    LrBiasRow& row = rows[static_cast<std::size_t>(i)];
    row.team = fit.index.teams()[static_cast<std::size_t>(i)];
    row.point = 0.0;
    for (double v : per_sample)
      row.point += v;
    row.point /= static_cast<double>(j_draws);
    std::sort(per_sample.begin(), per_sample.end());
    row.lo = percentile_type7_sorted(per_sample, 2.5);
    row.hi = percentile_type7_sorted(per_sample, 97.5);
  }
  std::sort(rows.begin(), rows.end(), [](const LrBiasRow& a, const LrBiasRow& b) {
    if (a.point != b.point)
      return a.point < b.point;
    return a.team < b.team;
  });
  return rows;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

const std::array<const char*, 8>& percentile_color_ramp() {
  static const std::array<const char*, 8> ramp = {
      "#440154", "#46327e", "#365c8d", "#277f8e",
      "#1fa187", "#4ac16d", "#a0da39", "#fde725"};
  return ramp;
}

namespace {

struct Tile {
  int area;
  Side side;
  double x, y, w, h;
};

// Half court, basket at the bottom; mirrored tiles for merged zones.
const std::vector<Tile>& court_tiles() {
  static const std::vector<Tile> tiles = {
      {8, Side::Center, 10, 10, 460, 70},    // backcourt
      {5, Side::Left, 10, 90, 92, 130},      // outside wing L
      {6, Side::Left, 102, 90, 92, 130},     // outside L
      {7, Side::Center, 194, 90, 92, 130},   // outside center
      {6, Side::Right, 286, 90, 92, 130},    // outside R
      {5, Side::Right, 378, 90, 92, 130},    // outside wing R
      {2, Side::Left, 10, 220, 92, 130},     // inside wing L
      {3, Side::Left, 102, 220, 92, 130},    // inside L
      {4, Side::Center, 194, 220, 92, 130},  // inside center
      {3, Side::Right, 286, 220, 92, 130},   // inside R
      {2, Side::Right, 378, 220, 92, 130},   // inside wing R
      {1, Side::Center, 140, 350, 200, 90},  // in the paint
      {0, Side::Center, 190, 440, 100, 60},  // under basket
  };
  return tiles;
}

std::string fmt1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", v);
  return buf;
}

} // namespace

std::string render_map_svg(const PercentileMap& map) {
  const auto& part = AreaPartition::instance();
  const auto& ramp = percentile_color_ramp();
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"560\" "
         "viewBox=\"0 0 480 560\">\n";
  svg << "<title>" << map.team << " " << map.season << " "
      << shot_type_name(map.shot_type) << "</title>\n";
  for (const Tile& t : court_tiles()) {
    int ad = part.area_side_index(t.area, t.side);
    double pct = map.percentile[static_cast<std::size_t>(ad)];
    const char* fill = "#cccccc";
    if (std::isfinite(pct)) {
      int bin = std::min(7, static_cast<int>(pct / 12.5));
      fill = ramp[static_cast<std::size_t>(bin)];
    }
    svg << "<rect x=\"" << fmt1(t.x) << "\" y=\"" << fmt1(t.y) << "\" width=\""
        << fmt1(t.w) << "\" height=\"" << fmt1(t.h) << "\" fill=\"" << fill
        << "\" stroke=\"#ffffff\" stroke-width=\"2\"/>\n";
    if (std::isfinite(pct)) {
      int label = static_cast<int>(std::lround(pct));
      bool bright = pct >= 62.5;
      svg << "<text x=\"" << fmt1(t.x + t.w / 2) << "\" y=\""
          << fmt1(t.y + t.h / 2 + 5) << "\" text-anchor=\"middle\" font-size=\"16\" "
             "font-family=\"sans-serif\" fill=\""
          << (bright ? "#222222" : "#ffffff") << "\">p" << label << "</text>\n";
    }
  }
  // legend
  for (int b = 0; b < 8; ++b) {
    svg << "<rect x=\"" << fmt1(10 + b * 58.0)
        << "\" y=\"520\" width=\"58\" height=\"16\" fill=\""
        << ramp[static_cast<std::size_t>(b)] << "\"/>\n";
  }
  svg << "<text x=\"10\" y=\"552\" font-size=\"11\" font-family=\"sans-serif\" "
         "fill=\"#222222\">p0</text>\n";
  svg << "<text x=\"470\" y=\"552\" text-anchor=\"end\" font-size=\"11\" "
         "font-family=\"sans-serif\" fill=\"#222222\">p100</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

std::string render_lr_svg(const std::vector<LrBiasRow>& rows) {
  const double width = 520.0, row_h = 22.0, left = 120.0, top = 30.0;
  const double plot_w = width - left - 20.0;
  double lo = -0.1, hi = 0.1;
  for (const auto& r : rows) {
    lo = std::min(lo, r.lo);
    hi = std::max(hi, r.hi);
  }
  double span = hi - lo;
  lo -= 0.05 * span;
  hi += 0.05 * span;
  double height = top + row_h * static_cast<double>(rows.size()) + 30.0;
  auto sx = [&](double v) { return left + (v - lo) / (hi - lo) * plot_w; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt1(width)
      << "\" height=\"" << fmt1(height) << "\" viewBox=\"0 0 " << fmt1(width) << " "
      << fmt1(height) << "\">\n";
  svg << "<title>log(Right/Left) bias</title>\n";
  // dashed zero-reference line
  svg << "<line x1=\"" << fmt1(sx(0.0)) << "\" y1=\"" << fmt1(top - 15.0)
      << "\" x2=\"" << fmt1(sx(0.0)) << "\" y2=\""
      << fmt1(height - 25.0)
      << "\" stroke=\"#555555\" stroke-dasharray=\"5 4\" stroke-width=\"1\"/>\n";
  double y = top;
  for (const auto& r : rows) {
    svg << "<text x=\"" << fmt1(left - 8.0) << "\" y=\"" << fmt1(y + 4.0)
        << "\" text-anchor=\"end\" font-size=\"12\" font-family=\"sans-serif\" "
           "fill=\"#222222\">"
        << r.team << "</text>\n";
    svg << "<line x1=\"" << fmt1(sx(r.lo)) << "\" y1=\"" << fmt1(y) << "\" x2=\""
        << fmt1(sx(r.hi)) << "\" y2=\"" << fmt1(y)
        << "\" stroke=\"#1f6fb4\" stroke-width=\"2\"/>\n";
    svg << "<circle cx=\"" << fmt1(sx(r.point)) << "\" cy=\"" << fmt1(y)
        << "\" r=\"3.5\" fill=\"#10324f\"/>\n";
    y += row_h;
  }
  svg << "<text x=\"" << fmt1(left) << "\" y=\"" << fmt1(height - 8.0)
      << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"#222222\">"
         "log(Right/Left), 95% interval</text>\n";
  svg << "</svg>\n";
  return svg.str();
}

void write_map_csv(const PercentileMap& map, std::ostream& out) {
  const auto& part = AreaPartition::instance();
  out << "team,season,shot_type,area,side,rate,percentile\n";
  char buf[64];
  const auto& pairs = part.valid_pairs();
  for (std::size_t ad = 0; ad < pairs.size(); ++ad) {
    out << map.team << ',' << map.season << ',' << shot_type_name(map.shot_type)
        << ',' << part.area_name(pairs[ad].first) << ',' << side_name(pairs[ad].second);
    std::snprintf(buf, sizeof(buf), "%.17g", map.rate[ad]);
    out << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", map.percentile[ad]);
    out << ',' << buf << '\n';
  }
}

void write_lr_csv(const std::vector<LrBiasRow>& rows, std::ostream& out) {
  out << "team,log_right_left,ci_lo,ci_hi\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.team;
    std::snprintf(buf, sizeof(buf), "%.17g", r.point);
    out << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", r.lo);
    out << ',' << buf;
    std::snprintf(buf, sizeof(buf), "%.17g", r.hi);
    out << ',' << buf << '\n';
  }
}

} // namespace stamp
