#include <catch2/catch_amalgamated.hpp>
#include <filesystem>
#include <fstream>

#include "parlab/config.hpp"
#include "parlab/runner.hpp"

using namespace parlab;

namespace {
json minimal_config() {
  return json{{"domain", {{"kind", "interval"}, {"lo", 0.0}, {"hi", 3.14159265358979323846}}},
              {"h", 3.14159265358979323846 / 40},
              {"coefficients", {{"a", "1"}, {"b", {"0"}}, {"c", "0"}}},
              {"source", "0"},
              {"dt", 0.01},
              {"kind", "eternal"},
              {"seed", 1}};
}
}  // namespace

TEST_CASE("config parsing round trip") {
  auto cfg = parse_config(minimal_config());
  CHECK(cfg.domain.dim() == 1);
  CHECK(cfg.spec.lambda == 1.0);
  CHECK(cfg.source.is_zero);
  CHECK(cfg.kind == "eternal");
  CHECK(cfg.scheme == Scheme::implicit_euler);

  SECTION("interval and polygon shorthands") {
    auto j = minimal_config();
    j["domain"] = {{"interval", {-1.0, 2.0}}};
    auto c1 = parse_config(j);
    CHECK(c1.domain.lo == -1.0);
    CHECK(c1.domain.hi == 2.0);

    j["domain"] = {{"polygon", json::array({json::array({0.0, 0.0}), json::array({1.0, 0.0}),
                                            json::array({1.0, 1.0}), json::array({0.0, 1.0})})}};
    j["coefficients"]["b"] = {"0", "0"};
    auto c2 = parse_config(j);
    CHECK(c2.domain.dim() == 2);
    CHECK(c2.domain.vertices.size() == 4);
  }
}

TEST_CASE("config rejections carry ConfigError semantics") {
  SECTION("dt = 0") {
    auto j = minimal_config();
    j["dt"] = 0.0;
    try {
      parse_config(j);
      FAIL("expected ConfigError");
    } catch (const Error& e) {
      CHECK(e.code() == errc::config_error);
      CHECK(std::string(e.what()).find("dt") != std::string::npos);
    }
  }

  SECTION("unknown kind") {
    auto j = minimal_config();
    j["kind"] = "frobnicate";
    CHECK_THROWS_AS(parse_config(j), Error);
  }

  SECTION("bad expression") {
    auto j = minimal_config();
    j["coefficients"]["c"] = "si n(t)";
    CHECK_THROWS_AS(parse_config(j), Error);
  }

  SECTION("autonomous spec whose coefficients use t") {
    auto j = minimal_config();
    j["coefficients"]["c"] = "t";
    CHECK_THROWS_AS(parse_config(j), Error);
  }

  SECTION("negative c surfaces at run time with the assumption name") {
    auto j = minimal_config();
    j["coefficients"]["c"] = "0 - 1";
    auto cfg = parse_config(j);
    try {
      run(cfg, (std::filesystem::temp_directory_path() / "parlab_negc").string());
      FAIL("expected NegativeC");
    } catch (const Error& e) {
      CHECK(e.code() == errc::negative_c);
      CHECK(std::string(e.what()).find("c") != std::string::npos);
    }
  }
}

TEST_CASE("config hash is stable and text parsing works") {
  auto j = minimal_config();
  CHECK(config_hash(j) == config_hash(j));
  auto j2 = j;
  j2["seed"] = 2;
  CHECK(config_hash(j) != config_hash(j2));
  auto cfg = parse_config_text(j.dump());
  CHECK(cfg.seed == 1);
  CHECK_THROWS_AS(parse_config_text("{not json"), Error);
}

TEST_CASE("schema lists the required surface") {
  auto s = config_schema();
  CHECK(s.contains("config"));
  CHECK(s.contains("expressions"));
  CHECK(s.contains("exit_codes"));
  std::string dump = s.dump();
  for (const char* key : {"domain", "dt", "kind", "PARLAB_OUT", "implicit_euler"})
    CHECK(dump.find(key) != std::string::npos);
}

TEST_CASE("runner on a small eternal config produces a deterministic result") {
  namespace fs = std::filesystem;
  auto j = minimal_config();
  j["params"] = {{"window", {0.0, 4.0}}, {"T_back", 8.0}};
  auto cfg = parse_config(j);

  fs::path dir1 = fs::temp_directory_path() / "parlab_det1";
  fs::path dir2 = fs::temp_directory_path() / "parlab_det2";
  fs::remove_all(dir1);
  fs::remove_all(dir2);
  auto r1 = run(cfg, dir1.string());
  auto r2 = run(cfg, dir2.string());
  CHECK(r1.overall_pass);
  CHECK(r2.overall_pass);

  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
  };
  std::string a = slurp(dir1 / "result.json");
  std::string b = slurp(dir2 / "result.json");
  REQUIRE(!a.empty());
  CHECK(a == b);  // byte-identical, timestamps live in meta.json
  CHECK(fs::exists(dir1 / "meta.json"));
  CHECK(fs::exists(dir1 / "u_hat.csv"));
  CHECK(fs::exists(dir1 / "eternal_trace.csv"));
  CHECK(fs::exists(dir1 / "eternal_meta.json"));
  CHECK(a.find("config_hash") != std::string::npos);

  SECTION("regress: identical dirs show no drift") {
    auto diffs = regress(dir1.string(), dir2.string());
    CHECK(diffs.empty());
  }

  SECTION("regress: a 10% delta drift is named") {
    fs::path drifted = fs::temp_directory_path() / "parlab_det3";
    fs::remove_all(drifted);
    fs::create_directories(drifted);
    json res = json::parse(slurp(dir1 / "result.json"));
    // inject a drift into a numeric report field
    res["reports"]["EternalSolution"]["rate"] =
        res["reports"]["EternalSolution"]["rate"].get<double>() * 1.1;
    std::ofstream(drifted / "result.json") << res.dump(2) << "\n";
    auto diffs = regress(dir1.string(), drifted.string());
    REQUIRE(!diffs.empty());
    bool named = false;
    for (const auto& d : diffs) named = named || d.path.find("EternalSolution.rate") != std::string::npos;
    CHECK(named);
  }

  SECTION("regress: csv row-count mismatch is a structural diff") {
    fs::path broken = fs::temp_directory_path() / "parlab_det4";
    fs::remove_all(broken);
    fs::create_directories(broken);
    std::ofstream(broken / "result.json") << slurp(dir1 / "result.json");
    std::string csv = slurp(dir1 / "u_hat.csv");
    csv += "0,0\r\n";
    std::ofstream(broken / "u_hat.csv", std::ios::binary) << csv;
    // copy the remaining csvs untouched
    for (const auto& e : fs::directory_iterator(dir1))
      if (e.path().extension() == ".csv" && e.path().filename() != "u_hat.csv")
        fs::copy_file(e.path(), broken / e.path().filename());
    auto diffs = regress(dir1.string(), broken.string());
    bool structural = false;
    for (const auto& d : diffs) structural = structural || d.what.find("row count") != std::string::npos;
    CHECK(structural);
  }

  SECTION("regress: missing golden raises MissingGolden") {
    try {
      regress((fs::temp_directory_path() / "parlab_nowhere").string(), dir1.string());
      FAIL("expected MissingGolden");
    } catch (const Error& e) {
      CHECK(e.code() == errc::missing_golden);
    }
  }

  SECTION("tolerances file loosens the comparison") {
    fs::path drifted = fs::temp_directory_path() / "parlab_det5";
    fs::remove_all(drifted);
    fs::create_directories(drifted);
    json res = json::parse(slurp(dir1 / "result.json"));
    double rate = res["reports"]["EternalSolution"]["rate"].get<double>();
    res["reports"]["EternalSolution"]["rate"] = rate * 1.05;
    std::ofstream(drifted / "result.json") << res.dump(2) << "\n";
    for (const auto& e : fs::directory_iterator(dir1))
      if (e.path().extension() == ".csv") fs::copy_file(e.path(), drifted / e.path().filename());
    json tol = {{"EternalSolution.rate", 0.10}};
    auto diffs = regress(dir1.string(), drifted.string(), tol);
    for (const auto& d : diffs) CHECK(d.path.find("rate") == std::string::npos);
  }
}

TEST_CASE("2D polygon config runs the max principle experiment") {
  json a_matrix = json::array({json::array({"1.1", "0.2"}), json::array({"0.2", "0.9"})});
  json j = {{"domain",
             {{"kind", "polygon"},
              {"vertices", {{-0.5, -0.5}, {1.5, -0.5}, {1.5, 0.5}, {0.5, 0.5}, {0.5, 1.5}, {-0.5, 1.5}}},
              {"origin_interior", true}}},
            {"h", 0.125},
            {"coefficients",
             {{"a", a_matrix}, {"b", {"0.3", "0 - 0.2"}}, {"c", "0.1"},
              {"lambda", 0.7}, {"Lambda", 1.3}}},
            {"source", "0"},
            {"dt", 0.02},
            {"kind", "max_principle"},
            {"params", {{"pairs", 5}}},
            {"seed", 3}};
  auto cfg = parse_config(j);
  auto dir = std::filesystem::temp_directory_path() / "parlab_lshape";
  std::filesystem::remove_all(dir);
  auto res = run(cfg, dir.string());
  CHECK(res.overall_pass);
  bool saw_m = false;
  for (const auto& c : res.checks)
    if (c.name == "max_principle.m_matrix") {
      saw_m = true;
      CHECK(c.pass);
    }
  CHECK(saw_m);
}
