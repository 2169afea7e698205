// Built against the library compiled without the RCA module.

#include <doctest.h>

#include <sstream>

#include "rcasim/engine.hpp"
#include "rcasim/experiment.hpp"

using namespace rcasim;

TEST_CASE("the RCA-free build refuses to lend") {
  SimConfig c;
  c.hosts = 4;
  c.bls.rca = true;
  CHECK_THROWS(simulate(c, JobSet{}));

  std::istringstream rca_on("[platform]\nhosts = 256\n[bls]\nrca = on\n");
  CHECK_THROWS_AS(parse_config(rca_on), ConfigError);
  std::istringstream rca_off("[bls]\nrca = off\n");
  CHECK(parse_config(rca_off).rca == std::vector<bool>{false});
  std::istringstream matrix("[bls]\nrca = off, on\n");
  CHECK(parse_config(matrix, false).rca == std::vector<bool>{false});
}

TEST_CASE("the RCA-free build still simulates") {
  JobSet js;
  JobSpec j;
  j.id = 1;
  j.requested_hosts = 2;
  j.task_count = 4;
  j.profile.mean_task_seconds = 1.0;
  j.estimated_runtime = 3.0;
  js.jobs.push_back(j);
  SimConfig c;
  c.hosts = 2;
  const auto r = simulate(c, js);
  CHECK(r.executed_task_time == SimTime::from_seconds(4.0));
  CHECK(r.rca.lend_grants == 0);
}
