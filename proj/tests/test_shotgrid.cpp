#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stamp/errors.hpp"
#include "stamp/rng.hpp"
#include "stamp/shotgrid.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>

using namespace stamp;

TEST_CASE("area partition invariants") {
  const auto& part = AreaPartition::instance();

  // 13 zones; mirror pairs share a merged area, the rest are their own.
  CHECK(part.zone(3).merged_area == part.zone(7).merged_area);
  CHECK(part.zone(4).merged_area == part.zone(6).merged_area);
  CHECK(part.zone(8).merged_area == part.zone(12).merged_area);
  CHECK(part.zone(9).merged_area == part.zone(11).merged_area);
  for (int z : {1, 2, 5, 10, 13}) {
    for (int other = 1; other <= 13; ++other)
      if (other != z)
        CHECK(part.zone(z).merged_area != part.zone(other).merged_area);
  }

  for (int z : {6, 7, 11, 12})
    CHECK(part.zone(z).side == Side::Left);
  for (int z : {1, 2, 5, 10, 13})
    CHECK(part.zone(z).side == Side::Center);
  for (int z : {3, 4, 8, 9})
    CHECK(part.zone(z).side == Side::Right);

  // exactly 13 valid (area, side) pairs, each hit by exactly one zone
  CHECK(part.valid_pairs().size() == 13);
  std::vector<int> zone_of_pair(13, 0);
  for (int z = 1; z <= 13; ++z) {
    int ad = part.area_side_index(part.zone(z).merged_area, part.zone(z).side);
    REQUIRE(ad >= 0);
    ++zone_of_pair[static_cast<std::size_t>(ad)];
  }
  for (int count : zone_of_pair)
    CHECK(count == 1);

  CHECK_THROWS_AS(part.zone(0), InvalidZone);
  CHECK_THROWS_AS(part.zone(14), InvalidZone);
}

TEST_CASE("classify_shot merges labels") {
  CHECK(classify_shot("driving layup") == ShotType::lay_up);
  CHECK(classify_shot("layup") == ShotType::lay_up);
  CHECK(classify_shot("jump shot") == ShotType::jump_shot);
  CHECK(classify_shot("fadeaway") == ShotType::fade_turn);
  CHECK(classify_shot("turnaround jump shot") == ShotType::fade_turn);
  CHECK(classify_shot("dunk") == ShotType::rim_finishes);
  CHECK(classify_shot("tip-in") == ShotType::rim_finishes);
  CHECK(classify_shot("alley-oop") == ShotType::rim_finishes);
  CHECK(classify_shot("hook shot") == ShotType::rim_finishes);
  CHECK(classify_shot("step-back jump shot") == ShotType::step_pull);
  CHECK(classify_shot("pull-up jump shot") == ShotType::step_pull);
  CHECK(classify_shot("floating jump shot") == ShotType::floater);
  CHECK_THROWS_AS(classify_shot("free throw"), UnknownLabel);
  CHECK_THROWS_AS(classify_shot(""), UnknownLabel);
}

TEST_CASE("zone_to_cell_axes") {
  auto [a6, d6] = zone_to_cell_axes(6);
  auto [a4, d4] = zone_to_cell_axes(4);
  CHECK(a6 == a4); // merged with zone 4
  CHECK(d6 == Side::Left);
  CHECK(d4 == Side::Right);

  auto [a1, d1] = zone_to_cell_axes(1);
  CHECK(std::string(AreaPartition::instance().area_name(a1)) == "under_basket");
  CHECK(d1 == Side::Center);

  CHECK_THROWS_AS(zone_to_cell_axes(14), InvalidZone);
  CHECK_THROWS_AS(zone_to_cell_axes(0), InvalidZone);
}

TEST_CASE("cell index is a deterministic bijection") {
  CellIndex idx({"b", "a", "c"}, {"2024-25", "2023-24"});
  CHECK(idx.num_teams() == 3);
  CHECK(idx.num_seasons() == 2);
  CHECK(idx.teams()[0] == "a"); // sorted
  CHECK(idx.seasons()[0] == "2023-24");
  CHECK(idx.num_cells() == 3 * 2 * 13 * 6);

  std::vector<bool> seen(static_cast<std::size_t>(idx.num_cells()), false);
  for (int c = 0; c < idx.num_cells(); ++c) {
    auto cell = idx.decode(c);
    int back = idx.cell(cell.team, cell.season, cell.area, cell.side, cell.shot_type);
    CHECK(back == c);
    CHECK(!seen[static_cast<std::size_t>(c)]);
    seen[static_cast<std::size_t>(c)] = true;
  }

  // lexicographic ordering in (team, season, area/side, shot type)
  auto c0 = idx.decode(0);
  CHECK(c0.team == 0);
  CHECK(c0.season == 0);
  CHECK(c0.shot_type == ShotType::jump_shot);
  CHECK(idx.decode(1).shot_type == ShotType::step_pull);
}

namespace {

PlayByPlayEvent make_event(const std::string& game, const std::string& team,
                           const std::string& season, double order, EventKind kind,
                           Phase phase = Phase::regular) {
  PlayByPlayEvent ev;
  ev.game_id = game;
  ev.team_id = team;
  ev.season = season;
  ev.order_key = order;
  ev.kind = kind;
  ev.phase = phase;
  return ev;
}

PlayByPlayEvent make_fga(const std::string& game, const std::string& team,
                         const std::string& season, double order,
                         const std::string& label, int zone,
                         Phase phase = Phase::regular) {
  PlayByPlayEvent ev = make_event(game, team, season, order,
                                  EventKind::field_goal_attempt, phase);
  ev.raw_shot_label = label;
  ev.zone_id = zone;
  return ev;
}

} // namespace

TEST_CASE("count_possessions follows the shot-terminated rule") {
  std::vector<PlayByPlayEvent> single = {make_fga("g1", "A", "s1", 1, "jump shot", 5)};
  CHECK(count_possessions(single, "A", "s1") == 1.0);

  // rebounded attempt and the put-back count as two possessions
  std::vector<PlayByPlayEvent> oreb = {
      make_fga("g1", "A", "s1", 1, "jump shot", 5),
      make_event("g1", "A", "s1", 2, EventKind::offensive_rebound),
      make_fga("g1", "A", "s1", 3, "layup", 1),
  };
  CHECK(count_possessions(oreb, "A", "s1") == 2.0);

  std::vector<PlayByPlayEvent> to = {
      make_fga("g1", "A", "s1", 1, "jump shot", 5),
      make_event("g1", "A", "s1", 2, EventKind::turnover),
  };
  CHECK(count_possessions(to, "A", "s1") == 2.0);

  std::vector<PlayByPlayEvent> empty;
  CHECK(count_possessions(empty, "A", "s1") == 0.0);

  // other teams' events do not leak in
  std::vector<PlayByPlayEvent> mixed = {
      make_fga("g1", "A", "s1", 1, "jump shot", 5),
      make_fga("g1", "B", "s1", 2, "dunk", 1),
  };
  CHECK(count_possessions(mixed, "A", "s1") == 1.0);
}

TEST_CASE("aggregate: single event hand trace") {
  std::vector<PlayByPlayEvent> events = {make_fga("g1", "A", "s1", 1, "jump shot", 6)};
  CellIndex idx = index_from_events(events);
  CountsAndExposure data = aggregate(events, idx, Phase::regular);

  CHECK(data.total_count() == 1);
  CHECK(data.exposure(0, 0) == 1.0);
  auto [area, side] = zone_to_cell_axes(6);
  int cell = idx.cell(0, 0, area, side, ShotType::jump_shot);
  CHECK(data.counts[static_cast<std::size_t>(cell)] == 1);
}

TEST_CASE("aggregate: conservation and determinism over random streams") {
  Rng rng(99);
  std::vector<PlayByPlayEvent> events;
  const char* labels[] = {"jump shot", "layup",            "dunk",
                          "floating jump shot", "pull-up jump shot", "fadeaway"};
  int n_fga_regular = 0;
  for (int i = 0; i < 500; ++i) {
    std::string game = "g" + std::to_string(i % 7);
    std::string team = "t" + std::to_string(static_cast<int>(rng.uniform() * 3));
    std::string season = rng.uniform() < 0.5 ? "s1" : "s2";
    Phase phase = rng.uniform() < 0.9 ? Phase::regular : Phase::post;
    double u = rng.uniform();
    if (u < 0.6) {
      int zone = 1 + static_cast<int>(rng.uniform() * 13);
      int label = static_cast<int>(rng.uniform() * 6);
      events.push_back(make_fga(game, team, season, i, labels[label], zone, phase));
      if (phase == Phase::regular)
        ++n_fga_regular;
    } else if (u < 0.8) {
      events.push_back(make_event(game, team, season, i, EventKind::turnover, phase));
    } else {
      events.push_back(
          make_event(game, team, season, i, EventKind::offensive_rebound, phase));
    }
  }
  CellIndex idx = index_from_events(events);
  CountsAndExposure data = aggregate(events, idx, Phase::regular);
  CHECK(data.total_count() == n_fga_regular);

  // permuting the stream leaves aggregation unchanged
  std::vector<PlayByPlayEvent> shuffled = events;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(5));
  CountsAndExposure data2 = aggregate(shuffled, idx, Phase::regular);
  CHECK(data.counts == data2.counts);
  CHECK(data.exposures == data2.exposures);
}

TEST_CASE("aggregate: zero events and error context") {
  std::vector<PlayByPlayEvent> events;
  CellIndex idx({"A"}, {"s1"});
  CountsAndExposure data = aggregate(events, idx, Phase::regular);
  CHECK(data.total_count() == 0);

  std::vector<PlayByPlayEvent> bad = {make_fga("g9", "A", "s1", 4, "granny shot", 3)};
  try {
    aggregate(bad, idx, Phase::regular);
    FAIL("expected UnknownLabel");
  } catch (const UnknownLabel& e) {
    CHECK(std::string(e.what()).find("g9") != std::string::npos);
  }
}

TEST_CASE("event csv parsing and ordering") {
  std::string path = "/tmp/stamp_test_events.csv";
  {
    std::ofstream out(path);
    out << "game_id,team_id,season,order_key,event_kind,raw_shot_label,zone_id,phase\n";
    out << "g1,A,s1,2,field_goal_attempt,jump shot,5,regular\n";
    out << "g1,A,s1,1,turnover,,,regular\n";
    out << "g1,B,s1,3,field_goal_attempt,driving layup,1,post\n";
  }
  auto events = read_event_csv(path);
  REQUIRE(events.size() == 3);
  CHECK(events[0].kind == EventKind::turnover); // sorted by order key
  CHECK(events[1].raw_shot_label.value() == "jump shot");
  CHECK(events[2].phase == Phase::post);

  // label/zone on a non-shot row is rejected
  {
    std::ofstream out(path);
    out << "game_id,team_id,season,order_key,event_kind,raw_shot_label,zone_id,phase\n";
    out << "g1,A,s1,1,turnover,jump shot,5,regular\n";
  }
  CHECK_THROWS_AS(read_event_csv(path), ParseError);
}

TEST_CASE("cell csv round trip preserves counts and exposures") {
  std::vector<PlayByPlayEvent> events = {
      make_fga("g1", "A", "s1", 1, "jump shot", 6),
      make_fga("g1", "A", "s1", 2, "dunk", 1),
      make_fga("g1", "B", "s1", 3, "floating jump shot", 9),
      make_event("g1", "B", "s1", 4, EventKind::turnover),
  };
  CellIndex idx = index_from_events(events);
  CountsAndExposure data = aggregate(events, idx, Phase::regular);

  std::ostringstream buffer;
  write_cell_csv(data, buffer);
  std::istringstream in(buffer.str());
  CountsAndExposure back = read_cell_csv(in);

  CHECK(back.counts == data.counts);
  CHECK(back.exposures == data.exposures);
  CHECK(back.split == data.split);
  CHECK(back.index.teams() == data.index.teams());
}
