#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sicwer_cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = sicwer::cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> result;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) result.push_back(line);
  return result;
}

std::vector<std::string> data_rows(const std::string& text) {
  std::vector<std::string> rows;
  const auto all = lines(text);
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i].empty() || all[i][0] == '#') continue;
    rows.push_back(all[i]);
  }
  if (!rows.empty()) rows.erase(rows.begin());  // column header
  return rows;
}

std::vector<std::string> fields(const std::string& row) {
  std::vector<std::string> result;
  std::string field;
  std::istringstream in(row);
  while (std::getline(in, field, ',')) result.push_back(field);
  if (!row.empty() && row.back() == ',') result.emplace_back();
  return result;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sicwer_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST(CliFormula, SingleOsicRow) {
  const auto r = run_cli({"formula", "--sigma", "0.5", "--n", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto all = lines(r.out);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[0].rfind("# sicwer formula", 0), 0u);
  EXPECT_EQ(all[1], "sigma,n,m,wer_formula");
  EXPECT_EQ(all[2], "0.5,1,1,0.5");
}

TEST(CliFormula, SnrAxisUsesPamConversion) {
  const auto r = run_cli({"formula", "--snr-db", "20", "--pam-u", "1", "--n", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = data_rows(r.out);
  ASSERT_EQ(rows.size(), 1u);
  const auto f = fields(rows[0]);
  ASSERT_EQ(f.size(), 5u);
  EXPECT_EQ(f[0], "20");
  EXPECT_EQ(f[3], "1");
  EXPECT_NEAR(sicwer::sigma_from_snr_db(1, 20.0), 0.05, 1e-15);
  EXPECT_NEAR(std::stod(f[4]), sicwer::wer_bsic_cube(1, 1, 0.05), 1e-12);
}

TEST(CliFormula, Fig1GridIsIncreasingPerN) {
  std::vector<std::string> args{"formula", "--n", "2,5,10,20,64"};
  for (int i = 1; i <= 9; ++i) {
    args.push_back("--sigma");
    args.push_back(std::to_string(i * 0.05));
  }
  const auto r = run_cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = data_rows(r.out);
  ASSERT_EQ(rows.size(), 45u);
  for (std::size_t block = 0; block < 5; ++block) {
    for (std::size_t i = 1; i < 9; ++i) {
      EXPECT_LT(std::stod(fields(rows[block * 9 + i - 1])[3]), std::stod(fields(rows[block * 9 + i])[3]));
    }
  }
}

TEST(CliFormula, ValuesHaveTwelveSignificantDigits) {
  const auto r = run_cli({"formula", "--sigma", "0.1", "--n", "10"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(fields(data_rows(r.out)[0])[3], "0.146006344701");
}

TEST(CliFormula, BoxFileAndTallModel) {
  const auto path = temp_path("box.txt");
  std::ofstream(path) << "0 1\n5 5\n-2 1\n1 8\n";
  const auto r = run_cli({"formula", "--sigma", "0.35", "--m", "6", "--box-file", path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(lines(r.out)[0].find("bounds:0:1;5:5;-2:1;1:8"), std::string::npos);
  const auto f = fields(data_rows(r.out)[0]);
  EXPECT_EQ(f[1], "4");
  EXPECT_EQ(f[2], "6");
  EXPECT_NEAR(std::stod(f[3]), 0.11604771439830353, 1e-11);
}

TEST(CliSimulate, NoNoiseGivesZeroWer) {
  const auto r = run_cli({"simulate", "--sigma", "1e-9", "--n", "1,4,8", "--trials", "2000", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = data_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& row : rows) {
    const auto f = fields(row);
    ASSERT_EQ(f.size(), 6u);
    EXPECT_EQ(f[3], "0");
    EXPECT_EQ(f[5], "2000");
  }
}

TEST(CliSimulate, SeedRepetitionIsByteIdentical) {
  const auto a = temp_path("a.csv");
  const auto b = temp_path("b.csv");
  const std::vector<std::string> base{"simulate", "--sigma", "0.3", "--n", "3,6", "--trials", "5000", "--seed", "9"};
  auto args_a = base;
  args_a.insert(args_a.end(), {"--workers", "1", "--out", a.string()});
  auto args_b = base;
  args_b.insert(args_b.end(), {"--workers", "5", "--out", b.string()});
  ASSERT_EQ(run_cli(args_a).code, 0);
  ASSERT_EQ(run_cli(args_b).code, 0);
  EXPECT_FALSE(slurp(a).empty());
  EXPECT_EQ(slurp(a), slurp(b));
}

TEST(CliCompare, DegenerateBoxHasZeroZ) {
  const auto r = run_cli({"compare", "--sigma", "0.5", "--n", "3", "--box-cube", "0", "--trials", "1000"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto f = fields(data_rows(r.out)[0]);
  ASSERT_EQ(f.size(), 9u);
  EXPECT_EQ(f[4], "0");
  EXPECT_EQ(f[5], "0");
  EXPECT_EQ(f[8], "0");
  EXPECT_NE(r.out.find("# max_abs_z=0\n"), std::string::npos);
}

TEST(CliCompare, ZScoreMatchesColumns) {
  const auto r = run_cli({"compare", "--sigma", "0.25", "--n", "4", "--trials", "20000", "--seed", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto f = fields(data_rows(r.out)[0]);
  const double z = (std::stod(f[4]) - std::stod(f[3])) / std::stod(f[5]);
  EXPECT_NEAR(std::stod(f[7]), z, 1e-9);
  EXPECT_LT(std::abs(z), 5.0);
}

TEST(CliSweep, PresetsProduceRows) {
  EXPECT_EQ(data_rows(run_cli({"sweep", "--preset", "fig1", "--formula-only"}).out).size(), 45u);
  EXPECT_EQ(data_rows(run_cli({"sweep", "--preset", "fig2", "--formula-only"}).out).size(), 128u);
  EXPECT_EQ(data_rows(run_cli({"sweep", "--preset", "fig3", "--formula-only"}).out).size(), 27u);
  EXPECT_EQ(data_rows(run_cli({"sweep", "--preset", "fig5", "--formula-only"}).out).size(), 50u);
  EXPECT_EQ(data_rows(run_cli({"sweep", "--preset", "fig6", "--formula-only"}).out).size(), 384u);
  EXPECT_EQ(run_cli({"sweep", "--preset", "nope"}).code, 1);
}

TEST(CliSweep, Fig5PresetLeavesDBlankForOsic) {
  const auto rows = data_rows(run_cli({"sweep", "--preset", "fig5", "--formula-only"}).out);
  EXPECT_EQ(fields(rows[0])[3], "");
  EXPECT_EQ(fields(rows[10])[3], "1");
  EXPECT_EQ(fields(rows[49])[3], "63");
}

TEST(CliSelfcheck, PassesAndNamesChecks) {
  const auto r = run_cli({"selfcheck"});
  EXPECT_EQ(r.code, 0) << r.out;
  int checks = 0;
  for (const auto& line : lines(r.out)) checks += line.rfind("PASS ", 0) == 0;
  EXPECT_GE(checks, 8);
}

TEST(CliSelfcheck, TamperedToleranceFails) {
  const auto r = run_cli({"selfcheck", "--tolerance", "1e-30"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("FAIL ck_times_full_integral_is_one"), std::string::npos);
}

TEST(CliConfig, FileFillsGapsAndFlagsWin) {
  const auto path = temp_path("run.cfg");
  std::ofstream(path) << "# grid\nn = 2,5\nsigma=0.1\nseed = 4\n";
  const auto from_file = run_cli({"formula", "--config", path.string()});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  EXPECT_EQ(data_rows(from_file.out).size(), 2u);
  const auto overridden = run_cli({"formula", "--config", path.string(), "--n", "3"});
  ASSERT_EQ(overridden.code, 0);
  ASSERT_EQ(data_rows(overridden.out).size(), 1u);
  EXPECT_EQ(fields(data_rows(overridden.out)[0])[1], "3");

  std::ofstream(path, std::ios::app) << "bogus = 1\n";
  EXPECT_EQ(run_cli({"formula", "--config", path.string()}).code, 1);
}

TEST(CliUsage, ErrorsExitWithOne) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"formula", "--n", "2"}).code, 1);
  EXPECT_EQ(run_cli({"formula", "--sigma", "0.1"}).code, 1);
  EXPECT_EQ(run_cli({"formula", "--sigma", "0.1", "--snr-db", "10", "--n", "2"}).code, 1);
  EXPECT_EQ(run_cli({"formula", "--sigma", "-0.1", "--n", "2"}).code, 1);
  EXPECT_EQ(run_cli({"formula", "--snr-db", "10", "--n", "2"}).code, 1);
  EXPECT_EQ(run_cli({"formula", "--snr-db", "10", "--pam-u", "1", "--box-cube", "3", "--n", "2"}).code, 1);
  EXPECT_EQ(run_cli({"formula", "--snr-db", "10", "--pam-u", "1", "--box-file", "x", "--n", "2"}).code, 1);
  EXPECT_EQ(run_cli({"formula", "--sigma", "0.1", "--n", "4", "--m", "3"}).code, 1);
  EXPECT_EQ(run_cli({"formula", "--sigma", "0.1", "--n", "0"}).code, 1);
  EXPECT_EQ(run_cli({"simulate", "--sigma", "0.1", "--n", "2", "--trials", "0"}).code, 1);
  EXPECT_EQ(run_cli({"formula", "--sigma", "0.1", "--n", "2", "--box-file", "/nonexistent/box"}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 1);
  EXPECT_EQ(run_cli({"formula", "--help"}).code, 0);
}
