// Copyright 2026 The LatentLens Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// End-to-end checks of the command-line tool.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <cmath>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("latentlens-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

struct Result {
  int code = -1;
  std::string output;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(LATENTLENS_CLI_PATH) + " " + args + " 2>&1";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_CASE("version, usage errors and presets") {
  CHECK(run("--version").code == 0);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("generate").code == 2);
  const Result p = run("presets");
  CHECK(p.code == 0);
  for (const char* name : {"laminar-ae-nz1", "laminar-ae-nz2", "laminar-ae-nz3", "laminar-mdae-nz2", "turbulent-ae-nz2",
                           "turbulent-ae-nz3", "turbulent-ae-nz28", "turbulent-large-decoder"}) {
    CHECK(p.output.find(name) != std::string::npos);
  }
  const Result one = run("presets turbulent-ae-nz28");
  CHECK(one.code == 0);
  CHECK(json::parse(one.output)["latent_dim"] == 28);
  CHECK(run("presets nope").code == 2);
}

TEST_CASE("generate is deterministic and sized as specified") {
  TempDir dir("cli-gen");
  REQUIRE(run("-q generate laminar --seed 7 -o " + q(dir / "a.snap")).code == 0);
  REQUIRE(run("-q generate laminar --seed 7 -o " + q(dir / "b.snap")).code == 0);
  CHECK(slurp(dir / "a.snap") == slurp(dir / "b.snap"));
  CHECK(fs::exists(dir / "a.snap.manifest.json"));
  const json m = load_json(dir / "a.snap.manifest.json");
  CHECK(m["seed"] == 7);
  CHECK(m["subcommand"] == "generate");

  REQUIRE(run("-q generate turbulent --nt 100000 -o " + q(dir / "t.snap")).code == 0);
  // magic, version, N, N_t, dt, kind, n_r, n_theta, radii, thetas, areas
  const std::uintmax_t header = 8 + 4 + 8 + 8 + 8 + 1 + 8 + 8 + 8 * 8 + 8 * 8 + 64 * 8;
  CHECK(fs::file_size(dir / "t.snap") == header + 64ull * 100000ull * 8ull);
}

TEST_CASE("config errors name the problem") {
  TempDir dir("cli-cfg");
  CHECK(run("generate laminar --config " + q(dir / "missing.json") + " -o " + q(dir / "x.snap")).code == 2);
  const Result printed = run("generate laminar --print-config");
  REQUIRE(printed.code == 0);
  json cfg = json::parse(printed.output);
  cfg.erase("ny");
  std::ofstream(dir / "c.json") << cfg.dump();
  const Result r = run("generate laminar --config " + q(dir / "c.json") + " -o " + q(dir / "x.snap"));
  CHECK(r.code == 3);
  CHECK(r.output.find("ny") != std::string::npos);
  std::ofstream(dir / "bad.snap") << "not a dataset";
  CHECK(run("pod " + q(dir / "bad.snap") + " --out " + q(dir / "pod")).code == 3);
}

TEST_CASE("csv import, pod and plots") {
  TempDir dir("cli-pod");
  {
    std::ofstream csv(dir / "in.csv");
    csv << "a,b,c\n";
    for (int t = 0; t < 50; ++t) csv << std::sin(0.3 * t) << "," << std::cos(0.3 * t) << "," << 2.0 + 0.1 * t << "\n";
  }
  REQUIRE(run("-q import " + q(dir / "in.csv") + " --layout rows=time --header --dt 0.5 -o " + q(dir / "in.snap")).code == 0);
  REQUIRE(run("-q pod " + q(dir / "in.snap") + " --out " + q(dir / "pod")).code == 0);
  const json pj = load_json(dir / "pod" / "pod.json");
  CHECK(pj["n"] == 3);
  CHECK(pj["n_t"] == 50);
  CHECK(pj["dt"] == 0.5);

  REQUIRE(run("-q generate turbulent --nt 1024 -o " + q(dir / "t.snap")).code == 0);
  REQUIRE(run("-q pod " + q(dir / "t.snap") + " --out " + q(dir / "tp")).code == 0);
  for (const char* f : {"modes.csv", "coeffs.csv", "eigenvalues.csv", "energy.csv", "grid.json", "manifest.json"}) {
    CHECK(fs::exists(dir / "tp" / f));
  }
  REQUIRE(run("-q plot " + q(dir / "tp" / "modes.csv") + " --modes 1,2,3 -o " + q(dir / "modes.svg")).code == 0);
  const std::string svg = slurp(dir / "modes.svg");
  std::size_t panels = 0;
  for (auto pos = svg.find("class=\"panel\""); pos != std::string::npos; pos = svg.find("class=\"panel\"", pos + 1)) ++panels;
  CHECK(panels == 3);
  REQUIRE(run("-q plot " + q(dir / "tp" / "energy.csv") + " --columns 2,3 --log-y -o " + q(dir / "e.svg")).code == 0);
  CHECK(slurp(dir / "e.svg").find("class=\"series\"") != std::string::npos);

  REQUIRE(run("-q spectrum " + q(dir / "tp" / "coeffs.csv") + " --kind premultiplied --columns 3 --segment 256 --out " +
              q(dir / "spec") + " --format svg").code == 0);
  CHECK(fs::exists(dir / "spec" / "spectrum.csv"));
  CHECK(fs::exists(dir / "spec" / "peaks.json"));
  CHECK(fs::exists(dir / "spec" / "spectrum.svg"));
}

TEST_CASE("train, decompose, rank and the hash guard") {
  TempDir dir("cli-train");
  REQUIRE(run("-q generate laminar -o " + q(dir / "a.snap")).code == 0);
  REQUIRE(run("-q generate laminar --seed 1 -o " + q(dir / "b.snap")).code == 0);
  REQUIRE(run("-q pod " + q(dir / "a.snap") + " --out " + q(dir / "pa")).code == 0);
  REQUIRE(run("-q pod " + q(dir / "b.snap") + " --out " + q(dir / "pb")).code == 0);
  const Result tr = run("-q train " + q(dir / "a.snap") + " --preset laminar-ae-nz2 --epochs 3 --out " + q(dir / "run"));
  REQUIRE(tr.code == 0);
  for (const char* f : {"config.json", "checkpoint.aewts", "report.json", "loss.csv", "latents.csv", "manifest.json"}) {
    CHECK(fs::exists(dir / "run" / f));
  }
  CHECK(load_json(dir / "run" / "report.json")["loss_curve"].size() == 3);

  const Result d = run("-q decompose " + q(dir / "run") + " --pod " + q(dir / "pa") + " --method both --out " + q(dir / "dec"));
  REQUIRE(d.code == 0);
  const json summary = load_json(dir / "dec" / "summary.json");
  CHECK(summary.contains("max_rel_gap"));
  CHECK(summary["max_rel_gap"].get<double>() < 1e-3);
  for (const char* f : {"decoder_coeffs.csv", "equivalent_energy.csv", "epsilon.csv", "epsilon_fd.csv"}) {
    CHECK(fs::exists(dir / "dec" / f));
  }

  const Result mismatch = run("decompose " + q(dir / "run") + " --pod " + q(dir / "pb") + " --out " + q(dir / "bad"));
  CHECK(mismatch.code == 3);
  const std::string ha = load_json(dir / "pa" / "pod.json")["data_hash"];
  const std::string hb = load_json(dir / "pb" / "pod.json")["data_hash"];
  CHECK(ha != hb);
  CHECK(mismatch.output.find(ha) != std::string::npos);
  CHECK(mismatch.output.find(hb) != std::string::npos);

  REQUIRE(run("-q rank " + q(dir / "dec") + " --target-modes 1,2 --out " + q(dir / "rank")).code == 0);
  const std::string ranking = slurp(dir / "rank" / "ranking.csv");
  CHECK(ranking.rfind("rank,latent,score", 0) == 0);
  CHECK(run("rank " + q(dir / "dec") + " --target-modes 0 --out " + q(dir / "rank2")).code == 2);

  REQUIRE(run("-q plot " + q(dir / "dec" / "epsilon.csv") + " -o " + q(dir / "eps.svg")).code == 0);
  CHECK(slurp(dir / "eps.svg").find("class=\"cell\"") != std::string::npos);

  REQUIRE(run("-q spectrum " + q(dir / "run" / "latents.csv") + " --kind fft --std-normalize --out " + q(dir / "ls")).code == 0);
  CHECK(fs::exists(dir / "ls" / "peaks.json"));
}

TEST_CASE("filter on a short turbulent run writes its artifacts") {
  TempDir dir("cli-filter");
  REQUIRE(run("-q generate turbulent --nt 2048 -o " + q(dir / "t.snap")).code == 0);
  REQUIRE(run("-q pod " + q(dir / "t.snap") + " --out " + q(dir / "pod")).code == 0);
  REQUIRE(run("-q train " + q(dir / "t.snap") + " --preset turbulent-ae-nz2 --epochs 1 --out " + q(dir / "run")).code == 0);
  const Result f = run("-q filter " + q(dir / "run") + " --pod " + q(dir / "pod") + " --keep top1 --out " + q(dir / "f"));
  REQUIRE(f.code == 0);
  for (const char* n : {"ranking.csv", "filtered_latents.csv", "filtered_energy.csv", "psd.csv", "filter.json", "manifest.json"}) {
    CHECK(fs::exists(dir / "f" / n));
  }
  const json fj = load_json(dir / "f" / "filter.json");
  CHECK(fj["keep"].size() == 1);
  CHECK(fj.contains("suppressed_band"));
  CHECK(run("filter " + q(dir / "run") + " --pod " + q(dir / "pod") + " --keep 5 --out " + q(dir / "g")).code == 2);
}
