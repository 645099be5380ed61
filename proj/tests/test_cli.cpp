#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "mdood/cli.hpp"
#include "mdood/model.hpp"
#include "mdood/report.hpp"

using namespace mdood;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "mdood");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("cli usage") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"fit", "--bogus"}).code == cli::kUsage);
  CHECK(run({"fit"}).code == cli::kUsage);
}

TEST_CASE("cli missing input names the path") {
  testing::TempDir dir;
  const auto missing = (dir / "nope.emb").string();
  const auto r = run({"fit", "--train", missing, "--out", (dir / "m.mdl").string()});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("nope.emb") != std::string::npos);
}

TEST_CASE("cli end to end") {
  testing::TempDir dir;
  const auto train = (dir / "train.emb").string();
  const auto test = (dir / "test.emb").string();
  const auto model = (dir / "m.mdl").string();
  const auto report = (dir / "report.json").string();

  REQUIRE(run({"synth", "--seed", "3", "--n-train", "2000", "--n-test-id", "1000", "--n-test-ood",
               "1000", "--classes", "4", "--layers", "4", "--dim", "16", "--ood-shift", "6",
               "--out-train", train, "--out-test", test})
              .code == 0);
  REQUIRE(run({"fit", "--train", train, "--out", model}).code == 0);
  const auto ev = run({"eval", "--model", model, "--test", test, "--report", report, "--table"});
  REQUIRE(ev.code == 0);
  CHECK(ev.out.find("AUROC") != std::string::npos);

  const auto doc = nlohmann::json::parse(slurp(report));
  CHECK(doc["auroc"].get<double>() >= 0.95);
  CHECK(doc["n_test"].get<int>() == 2000);
  CHECK(doc["closed_f1"].is_number());
  CHECK(doc["counts"].contains("tp"));

  const auto csv = (dir / "decisions.csv").string();
  REQUIRE(run({"score", "--model", model, "--data", test, "--out", csv}).code == 0);
  const auto text = slurp(csv);
  CHECK(text.rfind("index,label,rejection_score\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2001);

  const auto cmp = (dir / "cmp.json").string();
  const auto c = run({"compare", "--train", train, "--test", test, "--report", cmp, "--table"});
  REQUIRE(c.code == 0);
  const auto methods = nlohmann::json::parse(slurp(cmp))["methods"];
  for (const char* key : {"max_softmax", "md", "rmd", "proposed"}) CHECK(methods.contains(key));
}

TEST_CASE("cli shape mismatch on score") {
  testing::TempDir dir;
  std::mt19937_64 rng(1);
  write_embeddings(testing::random_set(rng, 30, 3, 2), dir / "train.emb");
  write_embeddings(testing::random_set(rng, 5, 2, 2), dir / "other.emb");
  REQUIRE(run({"fit", "--train", (dir / "train.emb").string(), "--out", (dir / "m.mdl").string(),
               "--contamination", "0.1"})
              .code == 0);
  const auto r = run({"score", "--model", (dir / "m.mdl").string(), "--data",
                      (dir / "other.emb").string(), "--out", (dir / "s.csv").string()});
  CHECK(r.code == cli::kDataError);
  CHECK(r.err.find("DimensionMismatch") != std::string::npos);

  // Unlabeled data without logits gets the score-only CSV.
  write_embeddings(testing::random_set(rng, 5, 3, 2), dir / "plain.emb");
  REQUIRE(run({"score", "--model", (dir / "m.mdl").string(), "--data",
               (dir / "plain.emb").string(), "--out", (dir / "s.csv").string()})
              .code == 0);
  CHECK(slurp(dir / "s.csv").rfind("index,rejection_score\n", 0) == 0);
}

TEST_CASE("report formatting") {
  CHECK(format_sig9(1.0 / 3.0) == "0.333333333");
  CHECK(format_sig9(0.5) == "0.5");

  EvalReport r;
  r.auroc = 0.123456789123;
  r.n_test = 10;
  const auto doc = nlohmann::json::parse(report_to_json(r));
  CHECK(doc["auroc"].get<double>() == 0.123456789);
  CHECK(doc["closed_f1"].is_null());

  const auto table = format_table({{"demo", r}});
  CHECK(table.find("AUPR (OUT)") != std::string::npos);
  CHECK(table.find("0.1235") != std::string::npos);

  CHECK(scores_to_csv(Eigen::Vector2d(0.5, 2)) == "index,rejection_score\n0,0.5\n1,2\n");
}
