#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct Run {
  int status = 0;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(ARW_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), got);
  const int st = pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

bool contains(const std::string& s, const std::string& sub) { return s.find(sub) != std::string::npos; }

}  // namespace

TEST(Cli, Lattice) {
  const auto a = run("--no-cache lattice 765");
  EXPECT_EQ(a.status, 0);
  EXPECT_TRUE(contains(a.out, "\"Q\":3"));
  const auto b = run("--no-cache lattice 25");
  EXPECT_TRUE(contains(b.out, "\"N\":12"));
  const auto c = run("--no-cache lattice 3");
  EXPECT_NE(c.status, 0);
  EXPECT_TRUE(contains(c.out, "NotRepresentable"));
}

TEST(Cli, Semicorr) {
  const auto a = run("--no-cache semicorr 5 --l 2");
  EXPECT_EQ(a.status, 0);
  EXPECT_TRUE(contains(a.out, "\"M_count\":16"));
  const auto b = run("--no-cache semicorr 5 --l 3");
  EXPECT_NE(b.status, 0);
  EXPECT_TRUE(contains(b.out, "OddLength"));
  const auto c = run("--no-cache --format csv semicorr 25 --l 4 --with-corr");
  EXPECT_EQ(c.status, 0);
  std::istringstream is(c.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "n,N,l,M_count,R_count,D_count,ratio");
  unsigned long long n, N, L, M, R, D;
  ASSERT_EQ(std::sscanf(row.c_str(), "%llu,%llu,%llu,%llu,%llu,%llu", &n, &N, &L, &M, &R, &D), 6);
  EXPECT_LE(D, R);
  EXPECT_LE(R, M);
}

TEST(Cli, UsageErrors) {
  EXPECT_NE(run("").status, 0);
  EXPECT_NE(run("lattice").status, 0);
  EXPECT_NE(run("--format xml lattice 5").status, 0);
}

TEST(Cli, CacheRecord) {
  const auto dir = std::filesystem::temp_directory_path() / "arw_cli_cache_test";
  std::filesystem::remove_all(dir);
  const auto a = run("--cache-dir " + dir.string() + " kacrice 65 --mq 120 --tolerance 0.5");
  EXPECT_EQ(a.status, 0);
  std::size_t files = 0;
  std::string text;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    ++files;
    std::ifstream in(e.path());
    text.assign(std::istreambuf_iterator<char>(in), {});
  }
  EXPECT_EQ(files, 1u);
  for (const char* key : {"\"command\"", "\"parameters\"", "\"outputs\"", "\"seed\"", "\"timestamp\"", "\"code_version\""})
    EXPECT_TRUE(contains(text, key)) << key;
  // replay is bit-identical for deterministic commands
  const auto b = run("--cache-dir " + dir.string() + " kacrice 65 --mq 120 --tolerance 0.5");
  EXPECT_EQ(a.out, b.out);
  std::filesystem::remove_all(dir);
}

TEST(Cli, ScanDeterministicAcrossThreads) {
  const auto a = run("--no-cache --format csv scan --min 2 --max 3000 --l 4");
  const auto b = run("--no-cache --format csv --threads 3 scan --min 2 --max 3000 --l 4");
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("n,N,l,M_count,R_count,ratio\n", 0), 0u);
}

TEST(Cli, ScanMatchesFixture) {
  std::ifstream in(std::string(ARW_FIXTURE_DIR) + "/scan_l4_2_20000.csv");
  ASSERT_TRUE(in.good());
  const std::string fixture((std::istreambuf_iterator<char>(in)), {});
  const auto a = run("--no-cache --format csv scan --min 2 --max 20000 --l 4");
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, fixture);
}

TEST(Cli, OtherCommands) {
  EXPECT_TRUE(contains(run("--no-cache montecarlo 25 --kind torus --trials 4 --ppw 10").out, "\"torus_expected\""));
  EXPECT_TRUE(contains(run("--no-cache deficiency 65 --trials 0 --mq 200").out, "\"correction_measured\""));
  EXPECT_TRUE(contains(run("--no-cache moments 65").out, "\"s2\""));
  EXPECT_TRUE(contains(run("--no-cache target -1 --tol 0 --max 100").out, "\"n\":2,"));
  const auto g = run("--no-cache sample 5 --grid 5");
  EXPECT_EQ(g.out.rfind("# M=5", 0), 0u);
}
