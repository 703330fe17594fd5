#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "rps_spde/rps_spde.h"

namespace fs = std::filesystem;

namespace {

const char* kMinimal =
    "experiment = \"basis-check\"\n"
    "seed = 5\n"
    "domain.c = 15.0\n"
    "basis.K_m = 4\n"
    "noise.sigma_rule = \"0.25/k\"\n";

}  // namespace

TEST(CApi, VersionAndNames) {
  EXPECT_STRNE(rps_version(), "");
  EXPECT_STREQ(rps_status_name(RPS_OK), "Ok");
  EXPECT_STREQ(rps_status_name(RPS_E_PARSE), "ParseError");
}

TEST(CApi, ParseGetSerialize) {
  rps_config* cfg = nullptr;
  ASSERT_EQ(rps_config_parse(kMinimal, &cfg), RPS_OK);
  ASSERT_NE(cfg, nullptr);
  EXPECT_STREQ(rps_last_error(), "");

  size_t needed = 0;
  EXPECT_EQ(rps_config_get(cfg, "basis.K_m", nullptr, 0, &needed), RPS_OK);
  EXPECT_EQ(needed, 2u);
  char buf[64];
  EXPECT_EQ(rps_config_get(cfg, "noise.sigma_rule", buf, sizeof buf, &needed), RPS_OK);
  EXPECT_STREQ(buf, "\"0.25/k\"");
  char tiny[3];
  EXPECT_EQ(rps_config_get(cfg, "noise.sigma_rule", tiny, sizeof tiny, &needed), RPS_E_INVALID_ARGUMENT);
  EXPECT_STREQ(tiny, "\"0");

  EXPECT_EQ(rps_config_set(cfg, "ihrie.n_t", "7"), RPS_OK);
  EXPECT_EQ(rps_config_validate(cfg), RPS_E_VALIDATION);
  EXPECT_NE(std::string(rps_last_error()).find("dt | tau"), std::string::npos);
  EXPECT_EQ(rps_config_set(cfg, "ihrie.n_t", "256"), RPS_OK);
  EXPECT_EQ(rps_config_validate(cfg), RPS_OK);
  EXPECT_EQ(rps_config_set(cfg, "bogus", "1"), RPS_E_INVALID_ARGUMENT);

  EXPECT_EQ(rps_config_serialize(cfg, nullptr, 0, &needed), RPS_OK);
  std::vector<char> text(needed);
  EXPECT_EQ(rps_config_serialize(cfg, text.data(), text.size(), &needed), RPS_OK);
  rps_config* again = nullptr;
  ASSERT_EQ(rps_config_parse(text.data(), &again), RPS_OK);
  std::vector<char> text2(needed);
  EXPECT_EQ(rps_config_serialize(again, text2.data(), text2.size(), nullptr), RPS_OK);
  EXPECT_STREQ(text.data(), text2.data());
  rps_config_free(again);
  rps_config_free(cfg);
}

TEST(CApi, ErrorsMapToStatus) {
  rps_config* cfg = nullptr;
  EXPECT_EQ(rps_config_parse("seed = 1\nseed = 2\n", &cfg), RPS_E_PARSE);
  EXPECT_EQ(cfg, nullptr);
  EXPECT_NE(std::string(rps_last_error()).find("line 2, column 1"), std::string::npos);
  EXPECT_EQ(rps_config_parse("seed = 1\n", &cfg), RPS_E_VALIDATION);
  EXPECT_EQ(rps_config_parse(nullptr, &cfg), RPS_E_INVALID_ARGUMENT);
  EXPECT_EQ(rps_config_load("/nonexistent/x.cfg", &cfg), RPS_E_IO);
  ASSERT_EQ(rps_config_parse_raw("seed = 1\n", &cfg), RPS_OK);
  EXPECT_EQ(rps_config_validate(cfg), RPS_E_VALIDATION);
  rps_config_free(cfg);
  rps_config_free(nullptr);
}

TEST(CApi, Basis) {
  rps_basis* b = nullptr;
  EXPECT_EQ(rps_basis_create(0.0, 1.0, 16, 15.0, 8, &b), RPS_E_GRID_TOO_COARSE);
  EXPECT_EQ(rps_basis_create(0.0, 1.0, 64, M_PI * M_PI, 4, &b), RPS_E_ZERO_EIGENVALUE);
  ASSERT_EQ(rps_basis_create(0.0, 1.0, 64, 15.0, 8, &b), RPS_OK);
  EXPECT_EQ(rps_basis_modes(b), 8);
  EXPECT_EQ(rps_basis_unstable(b), 1);
  double mu[8];
  ASSERT_EQ(rps_basis_eigenvalues(b, mu, 8), RPS_OK);
  EXPECT_NEAR(mu[1], -24.478417604357434475, 1e-12);
  EXPECT_EQ(rps_basis_eigenvalues(b, mu, 4), RPS_E_DIMENSION_MISMATCH);

  std::vector<double> u(64), back(64);
  for (int i = 0; i < 64; ++i) u[i] = 3.0 * std::sin(M_PI * i / 63.0);
  double c[8];
  ASSERT_EQ(rps_basis_project(b, u.data(), 64, c, 8), RPS_OK);
  EXPECT_NEAR(c[0], 2.1213203435596425732, 1e-13);
  ASSERT_EQ(rps_basis_reconstruct(b, c, 8, back.data(), 64), RPS_OK);
  for (int i = 0; i < 64; ++i) EXPECT_NEAR(back[i], u[i], 1e-13);
  EXPECT_EQ(rps_basis_project(b, u.data(), 63, c, 8), RPS_E_DIMENSION_MISMATCH);
  rps_basis_free(b);
}

TEST(CApi, Run) {
  const fs::path d = fs::temp_directory_path() / "rps_capi_run";
  fs::remove_all(d);
  rps_config* cfg = nullptr;
  ASSERT_EQ(rps_config_parse(kMinimal, &cfg), RPS_OK);
  ASSERT_EQ(rps_config_set(cfg, "output_dir", ("\"" + d.string() + "\"").c_str()), RPS_OK);
  int code = -1;
  EXPECT_EQ(rps_run(cfg, &code), RPS_OK);
  EXPECT_EQ(code, 0);
  EXPECT_TRUE(fs::exists(d / "manifest.json"));
  EXPECT_TRUE(fs::exists(d / "basis.csv"));
  rps_config_free(cfg);
  fs::remove_all(d);
}
