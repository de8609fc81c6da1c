#include "geonet/cli.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using geonet::cli::run_cli;
using Catch::Matchers::ContainsSubstring;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "geonet_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("proto-decode describes actions", "[cli]") {
  auto r = cli({"proto-decode", "--hex", "04 41 03000000 01000000 AA"});
  CHECK(r.code == 0);
  CHECK(r.out == "WriteFileData file=0x41 offset=3 len=1 payload=AA\n");

  r = cli({"proto-decode", "--hex", "0141000000000C000000", "--describe"});
  CHECK(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("[0..10) opcode=0x01 ReadFileData file=0x41 offset=0 len=12"));
}

TEST_CASE("proto-decode reports the failing offset", "[cli]") {
  auto r = cli({"proto-decode", "--hex", "EE41000000000C000000"});
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("offset 0"));
  r = cli({"proto-decode", "--hex", "0141000000000C000000 04"});
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("offset 10"));
  CHECK(cli({"proto-decode", "--hex", "XYZ"}).code == 2);
}

TEST_CASE("proto-encode inverts decode", "[cli]") {
  auto r = cli({"proto-encode", "WriteFileData file=0x41 offset=3 len=1 payload=AA", "ReadFileData file=0x40 offset=0 len=10"});
  REQUIRE(r.code == 0);
  CHECK(r.out == "04410300000001000000AA0140000000000A000000\n");
  const std::string hex = r.out.substr(0, r.out.size() - 1);
  auto back = cli({"proto-decode", "--hex", hex});
  CHECK(back.out ==
        "WriteFileData file=0x41 offset=3 len=1 payload=AA\nReadFileData file=0x40 offset=0 len=10\n");
  CHECK(cli({"proto-encode", "Bogus file=1"}).code == 2);
}

TEST_CASE("unknown flags and subcommands are errors", "[cli]") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"proto-decode", "--hex", "00", "--verbose"}).code == 2);
  CHECK(cli({"sim-run"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("feas-calibrate prints the cross-check and caveat", "[cli]") {
  auto r = cli({"feas-calibrate"});
  REQUIRE(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("r_elec=3.6903 ohm"));
  CHECK_THAT(r.out, ContainsSubstring("F,27.30,21.300,21.5080,+0.0098,ok"));
  CHECK_THAT(r.out, ContainsSubstring("A,1.78,0.572,0.0914,-0.8401,not-reproducible"));
  CHECK_THAT(r.out, ContainsSubstring("note: transects A and B"));

  auto p = cli({"feas-calibrate", "--params", GEONET_SCENARIO_DIR "/tg12_6.json"});
  CHECK(p.code == 0);
  CHECK_THAT(p.out, ContainsSubstring("r_elec=3.6903 ohm"));
}

TEST_CASE("feas-analyze on a constant trace", "[cli]") {
  const auto trace = scratch("const.csv");
  {
    std::ofstream f(trace);
    f << "timestamp_unix,transect,t_soil_c,t_air_c\n";
    for (int d = 0; d < 3; ++d) f << 1625097600 + d * 86400 << ",E,31.0,2.0\n";
  }
  const auto report = scratch("out/report.csv");
  std::filesystem::remove_all(report.parent_path());
  auto r = cli({"feas-analyze", "--trace", trace.string(), "--params", GEONET_SCENARIO_DIR "/tg12_6.json", "--out",
                report.string()});
  REQUIRE(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("transect E: mean_dt=29.000 C"));
  CHECK_THAT(r.out, ContainsSubstring("mean_power=24.2700 mW"));
  const auto csv = slurp(report);
  CHECK(csv.rfind("date,transect,mean_dt_c,mean_dt_teg_k,mean_power_mw\n2021-07-01,E,29.000000,", 0) == 0);
}

TEST_CASE("feas-analyze errors and clamping", "[cli]") {
  const auto empty = scratch("empty.csv");
  { std::ofstream f(empty); }
  auto r = cli({"feas-analyze", "--trace", empty.string()});
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("no samples"));

  const auto bad = scratch("bad.csv");
  {
    std::ofstream f(bad);
    f << "timestamp_unix,transect,t_soil_c,t_air_c\n1,A,1,1\n2,A,oops,1\n";
  }
  r = cli({"feas-analyze", "--trace", bad.string()});
  CHECK(r.code == 2);
  CHECK_THAT(r.err, ContainsSubstring("line 3"));

  const auto neg = scratch("neg.csv");
  {
    std::ofstream f(neg);
    f << "timestamp_unix,transect,t_soil_c,t_air_c\n1,B,1,5\n2,B,0,9\n";
  }
  r = cli({"feas-analyze", "--trace", neg.string(), "--clamp-positive"});
  CHECK(r.code == 0);
  CHECK_THAT(r.out, ContainsSubstring("mean_power=0.0000 mW"));
  CHECK_THAT(r.out, ContainsSubstring("note: transects A and B"));
}

TEST_CASE("sim-run writes outputs and rejects bad scenarios", "[cli]") {
  const auto sc = scratch("small.json");
  {
    std::ofstream f(sc);
    f << R"({"seed":3,"duration_s":7200,"sites":[{"site_id":"GO","link":{"loss_probability":0.2},
            "nodes":[{"uid":1,"transect":"E"},{"uid":2,"transect":"A","sensor_type":3}]}]})";
  }
  const auto out = scratch("simout");
  std::filesystem::remove_all(out);
  auto a = cli({"sim-run", "--scenario", sc.string(), "--out", out.string()});
  REQUIRE(a.code == 0);
  CHECK(std::filesystem::exists(out / "runlog.csv"));
  CHECK(std::filesystem::exists(out / "summary.txt"));
  CHECK(slurp(out / "sink.csv").rfind("timestamp,site,node_uid,transect,channel,value,unit\n", 0) == 0);
  CHECK(slurp(out / "runlog.csv").rfind("time_ms,event_kind,node_uid,detail\n", 0) == 0);
  CHECK_THAT(a.out, ContainsSubstring("delivery_ratio="));
  CHECK_THAT(a.out, ContainsSubstring("min_projected_lifetime="));

  auto b = cli({"sim-run", "--scenario", sc.string()});
  CHECK(b.out.substr(0, b.out.find('\n')) == a.out.substr(0, a.out.find('\n')));
  auto c = cli({"sim-run", "--scenario", sc.string(), "--seed", "99"});
  CHECK(c.out.substr(0, c.out.find('\n')) != a.out.substr(0, a.out.find('\n')));

  const auto dup = scratch("dup.json");
  {
    std::ofstream f(dup);
    f << R"({"seed":3,"duration_s":60,"sites":[{"site_id":"GO","nodes":[{"uid":8},{"uid":8}]}]})";
  }
  auto d = cli({"sim-run", "--scenario", dup.string()});
  CHECK(d.code == 2);
  CHECK_THAT(d.err, ContainsSubstring("duplicate node uid 8"));
  CHECK(cli({"sim-run", "--scenario", "/nonexistent.json"}).code == 2);
}
