#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stamp {

// ---------------------------------------------------------------------------
// Court and shot-type taxonomy
// ---------------------------------------------------------------------------

enum class Side : int { Left = 0, Center = 1, Right = 2 };
constexpr int kNumSides = 3;

const char* side_name(Side d);
Side side_from_name(const std::string& name);

enum class ShotType : int {
  jump_shot = 0,
  step_pull = 1,
  lay_up = 2,
  floater = 3,
  rim_finishes = 4,
  fade_turn = 5,
};
constexpr int kNumShotTypes = 6;

const char* shot_type_name(ShotType k);
ShotType shot_type_from_name(const std::string& name);

constexpr int kNumZones = 13;
constexpr int kNumAreas = 9;
constexpr int kNumValidAreaSides = 13;

/// Fixed partition of the half court: 13 zones collapsed onto 9 merged
/// areas, each zone carrying a Left/Center/Right side. Left/right mirror
/// zones share a merged area, so exactly 13 (area, side) pairs are valid.
struct AreaPartition {
  struct Zone {
    int id;                 // 1..13
    const char* name;       // display name
    int merged_area;        // 0..8
    Side side;
  };

  static const AreaPartition& instance();

  const Zone& zone(int zone_id) const; // throws InvalidZone outside 1..13
  const char* area_name(int area) const;
  /// Dense index of a valid (area, side) pair in 0..12; -1 if invalid.
  int area_side_index(int area, Side d) const;
  bool is_valid(int area, Side d) const { return area_side_index(area, d) >= 0; }
  /// The 13 valid pairs ordered lexicographically by (area, side).
  const std::vector<std::pair<int, Side>>& valid_pairs() const { return pairs_; }

private:
  AreaPartition();
  std::array<Zone, kNumZones> zones_;
  std::array<const char*, kNumAreas> area_names_;
  std::array<int, kNumAreas * kNumSides> pair_index_;
  std::vector<std::pair<int, Side>> pairs_;
};

/// Maps a raw play-by-play action label to a merged shot-type category.
/// Throws UnknownLabel for labels outside the declared set.
ShotType classify_shot(const std::string& raw_label);

/// Merged area and side for an original court zone (1..13).
std::pair<int, Side> zone_to_cell_axes(int zone_id);

// ---------------------------------------------------------------------------
// Cell index
// ---------------------------------------------------------------------------

/// Enumeration of observation cells c = (team, season, area, side, shot type)
/// over the 13 valid (area, side) pairs. Cell ids are dense and ordered
/// lexicographically in (team, season, area, side, shot type).
class CellIndex {
public:
  CellIndex() = default;
  CellIndex(std::vector<std::string> teams, std::vector<std::string> seasons);

  int num_teams() const { return static_cast<int>(teams_.size()); }
  int num_seasons() const { return static_cast<int>(seasons_.size()); }
  int num_cells() const {
    return num_teams() * num_seasons() * kNumValidAreaSides * kNumShotTypes;
  }

  const std::vector<std::string>& teams() const { return teams_; }
  const std::vector<std::string>& seasons() const { return seasons_; }

  int team_id(const std::string& team) const;
  int season_id(const std::string& season) const;

  /// Dense cell id; (area, side) must be one of the 13 valid pairs.
  int cell(int team, int season, int area, Side d, ShotType k) const;

  struct Cell {
    int team, season, area;
    Side side;
    ShotType shot_type;
  };
  Cell decode(int cell_id) const;

private:
  std::vector<std::string> teams_;
  std::vector<std::string> seasons_;
  std::map<std::string, int> team_lookup_;
  std::map<std::string, int> season_lookup_;
};

// ---------------------------------------------------------------------------
// Events and aggregation
// ---------------------------------------------------------------------------

enum class EventKind : int { field_goal_attempt, offensive_rebound, turnover, other };
enum class Phase : int { regular = 0, post = 1 };

const char* phase_name(Phase p);
Phase phase_from_name(const std::string& name);

struct PlayByPlayEvent {
  std::string game_id;
  std::string team_id;
  std::string season;
  double order_key = 0.0;
  EventKind kind = EventKind::other;
  std::optional<std::string> raw_shot_label;
  std::optional<int> zone_id;
  Phase phase = Phase::regular;
};

/// Per-cell counts with team-by-season possession exposures for one split.
struct CountsAndExposure {
  CellIndex index;
  std::vector<long long> counts;      // size index.num_cells()
  std::vector<double> exposures;      // size I*S, indexed team*S + season
  Phase split = Phase::regular;

  double exposure(int team, int season) const {
    return exposures[static_cast<std::size_t>(team) * index.num_seasons() + season];
  }
  long long total_count() const;
};

/// Possessions for one team-season under the shot-terminated rule: every
/// field-goal attempt ends a possession (an offensive rebound starts a new
/// one, so a put-back counts again) and every turnover ends a possession.
/// Events must be ordered within each game.
double count_possessions(const std::vector<PlayByPlayEvent>& events,
                         const std::string& team, const std::string& season);

/// Aggregates one phase of an event stream to cell-level counts and
/// possession exposures. All field_goal_attempt events must classify and
/// zone-map; failures are rethrown with the offending event's context.
CountsAndExposure aggregate(const std::vector<PlayByPlayEvent>& events,
                            const CellIndex& index, Phase phase);

/// Teams/seasons observed in a stream, in sorted order.
CellIndex index_from_events(const std::vector<PlayByPlayEvent>& events);

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// Event file: header
///   game_id,team_id,season,order_key,event_kind,raw_shot_label,zone_id,phase
/// Optional fields may be empty. Events are sorted by (game_id, order_key).
std::vector<PlayByPlayEvent> read_event_csv(const std::string& path);

/// Aggregated-cell file: header
///   team,season,area,side,shot_type,count,possessions,phase
/// The possessions column repeats the (team, season) exposure on each row
/// and overrides possession counting when loading.
void write_cell_csv(const CountsAndExposure& data, std::ostream& out);
void write_cell_csv_file(const CountsAndExposure& data, const std::string& path);
CountsAndExposure read_cell_csv(std::istream& in);
CountsAndExposure read_cell_csv_file(const std::string& path);

} // namespace stamp
