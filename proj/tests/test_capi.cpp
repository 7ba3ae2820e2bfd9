#include <cstdio>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "polycarl.h"

namespace {

struct Ctx {
  pcl_context* p = pcl_context_new();
  ~Ctx() { pcl_context_free(p); }
};

std::string out_dir(const char* name) {
  auto d = std::filesystem::temp_directory_path() / (std::string("polycarl_capi_") + name);
  std::filesystem::remove_all(d);
  return d.string();
}

}  // namespace

TEST_CASE("version and study list") {
  CHECK(std::string(pcl_version()) == "polycarl 0.1.0");
  REQUIRE(pcl_study_count() == 9);
  CHECK(std::string(pcl_study_name(0)) == "vdc");
  CHECK(pcl_study_name(9) == nullptr);
}

TEST_CASE("status codes") {
  Ctx c;
  REQUIRE(c.p);
  CHECK(pcl_run(c.p, "nets") == PCL_USAGE);
  CHECK(std::string(pcl_error_field(c.p)) == "study.seed");
  CHECK(pcl_config_set(c.p, "family.bogus", "1") == PCL_USAGE);
  CHECK(std::string(pcl_error_field(c.p)) == "family.bogus");
  CHECK(pcl_config_set(c.p, "seed", "11") == PCL_OK);
  CHECK(std::string(pcl_last_error(c.p)).empty());
  CHECK(pcl_config_set(c.p, "grid_bits", "12") == PCL_OK);
  CHECK(pcl_run(c.p, "decompose") == PCL_RESOURCE);
  CHECK(pcl_resource_estimate(c.p) == 4096.0);
  CHECK(pcl_config_load(c.p, "/nonexistent/polycarl.ini") == PCL_USAGE);
  CHECK(pcl_config_parse(c.p, "[study]\nseed = 1\nname = nets\n[family]\nk_max = 1\n") == PCL_OK);
  CHECK(pcl_config_set(c.p, "out", "/proc/polycarl_cannot_write_here") == PCL_OK);
  CHECK(pcl_run(c.p, nullptr) == PCL_IO);
  CHECK(pcl_run(nullptr, "nets") == PCL_USAGE);
  CHECK(pcl_config_set(c.p, nullptr, "1") == PCL_USAGE);
}

TEST_CASE("a study through the C API") {
  Ctx c;
  const auto dir = out_dir("nets");
  REQUIRE(pcl_config_parse(c.p, "[study]\nname = nets\nseed = 5\n[family]\nk_max = 2\n") == PCL_OK);
  REQUIRE(pcl_config_set(c.p, "out", dir.c_str()) == PCL_OK);
  REQUIRE(pcl_run(c.p, nullptr) == PCL_OK);
  CHECK(pcl_artifact_count(c.p) == 2);
  CHECK(std::filesystem::exists(pcl_artifact_path(c.p, 0)));
  CHECK(pcl_artifact_path(c.p, 2) == nullptr);
  auto j = nlohmann::json::parse(pcl_summary_json(c.p));
  CHECK(j["pass"] == true);
  CHECK(j["config"]["k_max"] == 2);
  const std::string first = pcl_summary_json(c.p);
  REQUIRE(pcl_run(c.p, nullptr) == PCL_OK);
  CHECK(first == pcl_summary_json(c.p));
  std::filesystem::remove_all(dir);
}

TEST_CASE("a failing hard assertion") {
  Ctx c;
  const auto dir = out_dir("fail");
  // D far below the observed counting constant.
  REQUIRE(pcl_config_parse(c.p, "[study]\nname = stopping\nseed = 5\n[thresholds]\nD = 0.01\n[run]\ntrials = 1\n") ==
          PCL_OK);
  REQUIRE(pcl_config_set(c.p, "out", dir.c_str()) == PCL_OK);
  CHECK(pcl_run(c.p, nullptr) == PCL_ASSERTION);
  CHECK(std::string(pcl_last_error(c.p)).find("counting") != std::string::npos);
  CHECK(pcl_artifact_count(c.p) > 0);
  std::filesystem::remove_all(dir);
}
