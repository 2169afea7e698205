#include <doctest.h>

#include <map>
#include <vector>

#include "rcasim/als.hpp"

using namespace rcasim;

namespace {
AppSchedState make_app(ChunkPolicyKind policy, std::int64_t tasks, std::vector<HostId> hosts,
                       std::vector<HostId> borrowed = {}) {
  return AppSchedState(1, policy, tasks, hosts, borrowed, 1.0, 0.0);
}
}  // namespace

TEST_CASE("finished work produces idle notices only") {
  auto app = make_app(ChunkPolicyKind::Gss, 0, {3, 5, 9});
  const auto r = run_scheduling_round(app, SimTime{});
  CHECK(r.assignments.empty());
  REQUIRE(r.idle.size() == 3);
  CHECK(r.idle[0].host == 3);
  CHECK(r.idle[2].host == 9);
  // Reported once.
  CHECK(run_scheduling_round(app, SimTime{}).idle.empty());
}

TEST_CASE("GSS round over partially busy hosts") {
  auto app = make_app(ChunkPolicyKind::Gss, 10, {0, 1, 2, 3});
  app.slots()[0].busy = true;
  app.slots()[1].busy = true;
  const auto r = run_scheduling_round(app, SimTime{});
  REQUIRE(r.assignments.size() == 2);
  CHECK(r.assignments[0].host == 2);
  CHECK(r.assignments[0].size == 3);
  CHECK(r.assignments[0].first_task == 0);
  CHECK(r.assignments[0].order == 0);
  CHECK(r.assignments[1].host == 3);
  CHECK(r.assignments[1].size == 2);
  CHECK(r.assignments[1].first_task == 3);
  CHECK(r.assignments[1].order == 1);
  CHECK(app.remaining() == 5);
  CHECK(r.idle.empty());
}

TEST_CASE("STATIC hands each worker one block") {
  auto app = make_app(ChunkPolicyKind::Static, 10, {0, 1, 2});
  const auto r = run_scheduling_round(app, SimTime{});
  REQUIRE(r.assignments.size() == 3);
  CHECK(r.assignments[0].size == 4);
  CHECK(r.assignments[1].size == 4);
  CHECK(r.assignments[2].size == 2);
  CHECK(app.remaining() == 0);
  app.complete(0, 4, 4.0);
  const auto after = run_scheduling_round(app, SimTime{});
  CHECK(after.assignments.empty());
  REQUIRE(after.idle.size() == 1);
  CHECK(after.idle[0].host == 0);
}

TEST_CASE("STATIC with more workers than tasks leaves extras idle") {
  auto app = make_app(ChunkPolicyKind::Static, 2, {0, 1, 2, 3});
  const auto r = run_scheduling_round(app, SimTime{});
  CHECK(r.assignments.size() == 2);
  CHECK(r.idle.size() == 2);
}

TEST_CASE("lent and excluded slots") {
  auto app = make_app(ChunkPolicyKind::Gss, 100, {0, 1, 2});
  app.slots()[0].lent = true;
  app.slots()[1].excluded = true;
  const auto r = run_scheduling_round(app, SimTime{});
  REQUIRE(r.assignments.size() == 1);
  CHECK(r.assignments[0].host == 2);
  REQUIRE(r.idle.size() == 1);
  CHECK(r.idle[0].host == 1);
  CHECK(r.idle[0].remaining == 100);  // scanned before host 2 took its chunk
}

TEST_CASE("borrowed slots are flagged") {
  auto app = make_app(ChunkPolicyKind::Gss, 4, {0, 7}, {7});
  CHECK_FALSE(app.slot(0)->borrowed);
  CHECK(app.slot(7)->borrowed);
  const auto r = run_scheduling_round(app, SimTime{});
  REQUIRE(r.assignments.size() == 2);
  CHECK(r.assignments[1].borrowed);
}

TEST_CASE("multi-app round visits apps in id order") {
  std::map<JobId, AppSchedState> apps;
  apps.emplace(2, AppSchedState(2, ChunkPolicyKind::Gss, 4, std::vector<HostId>{4, 5}, {}, 1.0, 0.0));
  apps.emplace(1, AppSchedState(1, ChunkPolicyKind::Gss, 4, std::vector<HostId>{0, 1}, {}, 1.0, 0.0));
  const auto r = run_scheduling_round(apps, SimTime{});
  REQUIRE(r.assignments.size() == 4);
  CHECK(r.assignments[0].job == 1);
  CHECK(r.assignments[2].job == 2);
  CHECK(r.assignments[2].order == 0);
}

TEST_CASE("app state preconditions") {
  CHECK_THROWS(make_app(ChunkPolicyKind::Gss, 4, {}));
  CHECK_THROWS(make_app(ChunkPolicyKind::Gss, 4, {1, 1}));
  auto app = make_app(ChunkPolicyKind::Gss, 4, {0});
  CHECK_THROWS(app.issue(0, 5));
  app.issue(0, 2);
  CHECK_THROWS(app.issue(0, 1));
  app.complete(0, 2, 2.0);
  CHECK_THROWS(app.complete(0, 2, 2.0));
  CHECK_THROWS(app.slot_index(9));
}

TEST_CASE("FAC app uses the configured factoring state") {
  AppSchedState app(1, ChunkPolicyKind::Fac, 128, std::vector<HostId>{0, 1, 2, 3}, {}, 1.0, 0.0);
  const auto r = run_scheduling_round(app, SimTime{});
  REQUIRE(r.assignments.size() == 4);
  for (const auto& a : r.assignments) CHECK(a.size == 16);
}
