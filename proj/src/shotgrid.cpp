#include "stamp/shotgrid.hpp"

#include "stamp/errors.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace stamp {

const char* side_name(Side d) {
  switch (d) {
  case Side::Left: return "Left";
  case Side::Center: return "Center";
  case Side::Right: return "Right";
  }
  return "?";
}

Side side_from_name(const std::string& name) {
  if (name == "Left") return Side::Left;
  if (name == "Center") return Side::Center;
  if (name == "Right") return Side::Right;
  throw ParseError("unknown side: " + name);
}

const char* shot_type_name(ShotType k) {
  switch (k) {
  case ShotType::jump_shot: return "jump_shot";
  case ShotType::step_pull: return "step_pull";
  case ShotType::lay_up: return "lay_up";
  case ShotType::floater: return "floater";
  case ShotType::rim_finishes: return "rim_finishes";
  case ShotType::fade_turn: return "fade_turn";
  }
  return "?";
}

ShotType shot_type_from_name(const std::string& name) {
  for (int k = 0; k < kNumShotTypes; ++k)
    if (name == shot_type_name(static_cast<ShotType>(k)))
      return static_cast<ShotType>(k);
  throw ParseError("unknown shot type: " + name);
}

// ---------------------------------------------------------------------------
// AreaPartition
// ---------------------------------------------------------------------------

AreaPartition::AreaPartition() {
  // Zones 1..13; mirror pairs (3,7), (4,6), (8,12), (9,11) share an area.
  // Merged-area names strip the left/right qualifier.
  zones_ = {{
      {1, "under basket", 0, Side::Center},
      {2, "in the paint", 1, Side::Center},
      {3, "inside right wing", 2, Side::Right},
      {4, "inside right", 3, Side::Right},
      {5, "inside center", 4, Side::Center},
      {6, "inside left", 3, Side::Left},
      {7, "inside left wing", 2, Side::Left},
      {8, "outside right wing", 5, Side::Right},
      {9, "outside right", 6, Side::Right},
      {10, "outside center", 7, Side::Center},
      {11, "outside left", 6, Side::Left},
      {12, "outside left wing", 5, Side::Left},
      {13, "backcourt", 8, Side::Center},
  }};
  area_names_ = {"under_basket", "in_the_paint", "inside_wing", "inside",
                 "inside_center", "outside_wing", "outside", "outside_center",
                 "backcourt"};
  pair_index_.fill(-1);
  for (const Zone& z : zones_) {
    pair_index_[z.merged_area * kNumSides + static_cast<int>(z.side)] = 0;
  }
  for (int a = 0; a < kNumAreas; ++a)
    for (int d = 0; d < kNumSides; ++d)
      if (pair_index_[a * kNumSides + d] == 0) {
        pair_index_[a * kNumSides + d] = static_cast<int>(pairs_.size());
        pairs_.emplace_back(a, static_cast<Side>(d));
      }
}

const AreaPartition& AreaPartition::instance() {
  static const AreaPartition part;
  return part;
}

const AreaPartition::Zone& AreaPartition::zone(int zone_id) const {
  if (zone_id < 1 || zone_id > kNumZones)
    throw InvalidZone("zone id out of range: " + std::to_string(zone_id));
  return zones_[static_cast<std::size_t>(zone_id - 1)];
}

const char* AreaPartition::area_name(int area) const {
  return area_names_.at(static_cast<std::size_t>(area));
}

int AreaPartition::area_side_index(int area, Side d) const {
  if (area < 0 || area >= kNumAreas)
    return -1;
  return pair_index_[area * kNumSides + static_cast<int>(d)];
}

// ---------------------------------------------------------------------------
// Shot classification
// ---------------------------------------------------------------------------

ShotType classify_shot(const std::string& raw_label) {
  static const std::map<std::string, ShotType> raw_map = {
      {"jump shot", ShotType::jump_shot},
      {"step-back jump shot", ShotType::step_pull},
      {"pull-up jump shot", ShotType::step_pull},
      {"layup", ShotType::lay_up},
      {"driving layup", ShotType::lay_up},
      {"floating jump shot", ShotType::floater},
      {"dunk", ShotType::rim_finishes},
      {"tip-in", ShotType::rim_finishes},
      {"alley-oop", ShotType::rim_finishes},
      {"hook shot", ShotType::rim_finishes},
      {"fadeaway", ShotType::fade_turn},
      {"turnaround jump shot", ShotType::fade_turn},
  };
  auto it = raw_map.find(raw_label);
  if (it == raw_map.end())
    throw UnknownLabel("unknown shot label: \"" + raw_label + "\"");
  return it->second;
}

std::pair<int, Side> zone_to_cell_axes(int zone_id) {
  const auto& z = AreaPartition::instance().zone(zone_id);
  return {z.merged_area, z.side};
}

// ---------------------------------------------------------------------------
// CellIndex
// ---------------------------------------------------------------------------

CellIndex::CellIndex(std::vector<std::string> teams, std::vector<std::string> seasons)
    : teams_(std::move(teams)), seasons_(std::move(seasons)) {
  std::sort(teams_.begin(), teams_.end());
  std::sort(seasons_.begin(), seasons_.end());
  teams_.erase(std::unique(teams_.begin(), teams_.end()), teams_.end());
  seasons_.erase(std::unique(seasons_.begin(), seasons_.end()), seasons_.end());
  for (std::size_t i = 0; i < teams_.size(); ++i)
    team_lookup_[teams_[i]] = static_cast<int>(i);
  for (std::size_t s = 0; s < seasons_.size(); ++s)
    season_lookup_[seasons_[s]] = static_cast<int>(s);
}

int CellIndex::team_id(const std::string& team) const {
  auto it = team_lookup_.find(team);
  if (it == team_lookup_.end())
    throw ParseError("unknown team: " + team);
  return it->second;
}

int CellIndex::season_id(const std::string& season) const {
  auto it = season_lookup_.find(season);
  if (it == season_lookup_.end())
    throw ParseError("unknown season: " + season);
  return it->second;
}

int CellIndex::cell(int team, int season, int area, Side d, ShotType k) const {
  int ad = AreaPartition::instance().area_side_index(area, d);
  if (ad < 0)
    throw InvalidZone("invalid (area, side) pair: area " + std::to_string(area) +
                      ", side " + side_name(d));
  return ((team * num_seasons() + season) * kNumValidAreaSides + ad) * kNumShotTypes +
         static_cast<int>(k);
}

CellIndex::Cell CellIndex::decode(int cell_id) const {
  Cell c;
  c.shot_type = static_cast<ShotType>(cell_id % kNumShotTypes);
  cell_id /= kNumShotTypes;
  int ad = cell_id % kNumValidAreaSides;
  cell_id /= kNumValidAreaSides;
  c.season = cell_id % num_seasons();
  c.team = cell_id / num_seasons();
  const auto& pair = AreaPartition::instance().valid_pairs()[static_cast<std::size_t>(ad)];
  c.area = pair.first;
  c.side = pair.second;
  return c;
}

// ---------------------------------------------------------------------------
// Aggregation
// ---------------------------------------------------------------------------

const char* phase_name(Phase p) { return p == Phase::regular ? "regular" : "post"; }

Phase phase_from_name(const std::string& name) {
  if (name == "regular") return Phase::regular;
  if (name == "post") return Phase::post;
  throw ParseError("unknown phase: " + name);
}

long long CountsAndExposure::total_count() const {
  long long t = 0;
  for (long long c : counts)
    t += c;
  return t;
}

double count_possessions(const std::vector<PlayByPlayEvent>& events,
                         const std::string& team, const std::string& season) {
  // Under the shot-terminated rule a possession is counted at each of its
  // terminators: a field-goal attempt or a turnover. An offensive rebound
  // only opens a new possession, whose own terminator is counted later.
  long long n = 0;
  for (const auto& ev : events) {
    if (ev.team_id != team || ev.season != season)
      continue;
    if (ev.kind == EventKind::field_goal_attempt || ev.kind == EventKind::turnover)
      ++n;
  }
  return static_cast<double>(n);
}

CellIndex index_from_events(const std::vector<PlayByPlayEvent>& events) {
  std::set<std::string> teams, seasons;
  for (const auto& ev : events) {
    teams.insert(ev.team_id);
    seasons.insert(ev.season);
  }
  return CellIndex(std::vector<std::string>(teams.begin(), teams.end()),
                   std::vector<std::string>(seasons.begin(), seasons.end()));
}

CountsAndExposure aggregate(const std::vector<PlayByPlayEvent>& events,
                            const CellIndex& index, Phase phase) {
  CountsAndExposure out;
  out.index = index;
  out.split = phase;
  out.counts.assign(static_cast<std::size_t>(index.num_cells()), 0);
  out.exposures.assign(
      static_cast<std::size_t>(index.num_teams()) * index.num_seasons(), 0.0);

  for (const auto& ev : events) {
    if (ev.phase != phase)
      continue;
    int i = index.team_id(ev.team_id);
    int s = index.season_id(ev.season);
    if (ev.kind == EventKind::field_goal_attempt || ev.kind == EventKind::turnover)
      out.exposures[static_cast<std::size_t>(i) * index.num_seasons() + s] += 1.0;
    if (ev.kind != EventKind::field_goal_attempt)
      continue;
    if (!ev.raw_shot_label || !ev.zone_id)
      throw ParseError("field_goal_attempt without label/zone (game " + ev.game_id +
                       ", order " + std::to_string(ev.order_key) + ")");
    try {
      ShotType k = classify_shot(*ev.raw_shot_label);
      auto [area, side] = zone_to_cell_axes(*ev.zone_id);
      ++out.counts[static_cast<std::size_t>(index.cell(i, s, area, side, k))];
    } catch (const StampError& e) {
      throw UnknownLabel(std::string(e.what()) + " (game " + ev.game_id + ", order " +
                         std::to_string(ev.order_key) + ")");
    }
  }

  // E must be positive wherever counts landed.
  for (int i = 0; i < index.num_teams(); ++i)
    for (int s = 0; s < index.num_seasons(); ++s) {
      double e = out.exposure(i, s);
      if (e > 0.0)
        continue;
      long long slice = 0;
      for (int ad = 0; ad < kNumValidAreaSides; ++ad)
        for (int k = 0; k < kNumShotTypes; ++k) {
          const auto& pair =
              AreaPartition::instance().valid_pairs()[static_cast<std::size_t>(ad)];
          slice += out.counts[static_cast<std::size_t>(
              index.cell(i, s, pair.first, pair.second, static_cast<ShotType>(k)))];
        }
      if (slice > 0)
        throw DomainError("zero exposure with nonzero counts for team " +
                          index.teams()[static_cast<std::size_t>(i)] + ", season " +
                          index.seasons()[static_cast<std::size_t>(s)]);
    }
  return out;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

EventKind event_kind_from_name(const std::string& name) {
  if (name == "field_goal_attempt") return EventKind::field_goal_attempt;
  if (name == "offensive_rebound") return EventKind::offensive_rebound;
  if (name == "turnover") return EventKind::turnover;
  if (name == "other") return EventKind::other;
  throw ParseError("unknown event kind: " + name);
}

} // namespace

std::vector<PlayByPlayEvent> read_event_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open event file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("empty event file: " + path);
  std::vector<PlayByPlayEvent> events;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    auto f = split_csv_line(line);
    if (f.size() != 8)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected 8 fields");
    PlayByPlayEvent ev;
    ev.game_id = f[0];
    ev.team_id = f[1];
    ev.season = f[2];
    ev.order_key = std::stod(f[3]);
    ev.kind = event_kind_from_name(f[4]);
    if (!f[5].empty())
      ev.raw_shot_label = f[5];
    if (!f[6].empty())
      ev.zone_id = std::stoi(f[6]);
    ev.phase = phase_from_name(f[7]);
    if (ev.kind == EventKind::field_goal_attempt) {
      if (!ev.raw_shot_label || !ev.zone_id)
        throw ParseError(path + ":" + std::to_string(lineno) +
                         ": field_goal_attempt requires label and zone");
    } else if (ev.raw_shot_label || ev.zone_id) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": label/zone only allowed on field_goal_attempt");
    }
    events.push_back(std::move(ev));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const PlayByPlayEvent& a, const PlayByPlayEvent& b) {
                     if (a.game_id != b.game_id)
                       return a.game_id < b.game_id;
                     return a.order_key < b.order_key;
                   });
  return events;
}

void write_cell_csv(const CountsAndExposure& data, std::ostream& out) {
  const auto& part = AreaPartition::instance();
  out << "team,season,area,side,shot_type,count,possessions,phase\n";
  char buf[64];
  for (int c = 0; c < data.index.num_cells(); ++c) {
    auto cell = data.index.decode(c);
    std::snprintf(buf, sizeof(buf), "%.17g",
                  data.exposure(cell.team, cell.season));
    out << data.index.teams()[static_cast<std::size_t>(cell.team)] << ','
        << data.index.seasons()[static_cast<std::size_t>(cell.season)] << ','
        << part.area_name(cell.area) << ',' << side_name(cell.side) << ','
        << shot_type_name(cell.shot_type) << ','
        << data.counts[static_cast<std::size_t>(c)] << ',' << buf << ','
        << phase_name(data.split) << '\n';
  }
}

void write_cell_csv_file(const CountsAndExposure& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw ParseError("cannot open for writing: " + path);
  write_cell_csv(data, out);
}

CountsAndExposure read_cell_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw ParseError("empty cell file");

  struct Row {
    std::string team, season;
    int area;
    Side side;
    ShotType shot_type;
    long long count;
    double possessions;
    Phase phase;
  };
  const auto& part = AreaPartition::instance();
  auto area_from_name = [&part](const std::string& name) {
    for (int a = 0; a < kNumAreas; ++a)
      if (name == part.area_name(a))
        return a;
    throw ParseError("unknown area: " + name);
  };

  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty())
      continue;
    auto f = split_csv_line(line);
    if (f.size() != 8)
      throw ParseError("cell file line " + std::to_string(lineno) + ": expected 8 fields");
    Row r;
    r.team = f[0];
    r.season = f[1];
    r.area = area_from_name(f[2]);
    r.side = side_from_name(f[3]);
    r.shot_type = shot_type_from_name(f[4]);
    r.count = std::stoll(f[5]);
    r.possessions = std::stod(f[6]);
    r.phase = phase_from_name(f[7]);
    if (!part.is_valid(r.area, r.side))
      throw InvalidZone("cell file line " + std::to_string(lineno) +
                        ": invalid (area, side) pair");
    rows.push_back(std::move(r));
  }
  if (rows.empty())
    throw EmptyData("cell file has no rows");

  std::vector<std::string> teams, seasons;
  for (const auto& r : rows) {
    teams.push_back(r.team);
    seasons.push_back(r.season);
  }
  CountsAndExposure out;
  out.index = CellIndex(std::move(teams), std::move(seasons));
  out.split = rows.front().phase;
  out.counts.assign(static_cast<std::size_t>(out.index.num_cells()), 0);
  out.exposures.assign(
      static_cast<std::size_t>(out.index.num_teams()) * out.index.num_seasons(), 0.0);
  for (const auto& r : rows) {
    if (r.phase != out.split)
      throw ParseError("cell file mixes phases; one phase per file");
    int i = out.index.team_id(r.team);
    int s = out.index.season_id(r.season);
    out.counts[static_cast<std::size_t>(
        out.index.cell(i, s, r.area, r.side, r.shot_type))] += r.count;
    out.exposures[static_cast<std::size_t>(i) * out.index.num_seasons() + s] =
        r.possessions;
  }
  return out;
}

CountsAndExposure read_cell_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw ParseError("cannot open cell file: " + path);
  return read_cell_csv(in);
}

} // namespace stamp
