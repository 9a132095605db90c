#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <regex>
#include <set>

#include "embinv/ingest.hpp"
#include "embinv/report.hpp"
#include "embinv/run_io.hpp"
#include "support.hpp"

using namespace embinv;
using namespace embinv::report;
using embinv::testing::error_kind;

namespace {

struct Bar {
  std::string position;
  double height = 0.0;
  std::string fill;
};

std::vector<Bar> bars_of(const std::string& svg) {
  static const std::regex rect(
      R"re(<rect data-position="(P[0-9]+)"[^>]*height="([0-9.]+)" fill="(#[0-9a-f]{6})")re");
  std::vector<Bar> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), rect); it != std::sregex_iterator();
       ++it) {
    out.push_back({(*it)[1].str(), std::stod((*it)[2].str()), (*it)[3].str()});
  }
  return out;
}

metrics::PrivacyComparison comparison_of(const std::vector<double>& deltas) {
  AttackRun pre;
  pre.per_position_accuracy = std::vector<double>(20, 0.5);
  pre.average_accuracy = 0.5;
  AttackRun ft;
  for (double d : deltas) ft.per_position_accuracy.push_back(0.5 - d);
  ft.average_accuracy = metrics::mean(ft.per_position_accuracy);
  return metrics::privacy_change(pre, ft);
}

}  // namespace

TEST_SUITE("report") {

TEST_CASE("bundled rows match the published table") {
  const auto& t = ReferenceTable::bundled();
  CHECK(t.rows().size() == 17);
  const auto& bert = t.row("bert", RowKind::pretrained);
  CHECK(bert.display_name == "BERT-base");
  CHECK(bert.positions[0] == 1.000);
  CHECK(bert.positions[1] == 0.450);
  CHECK(bert.positions[2] == 0.300);
  CHECK(bert.positions[19] == 1.000);
  CHECK(bert.published_average == 0.380);
  CHECK(t.row("ernie", RowKind::pans).published_average == 0.483);
  CHECK(t.row("roberta", RowKind::finetuned).published_average == 0.331);
  CHECK(t.rows_for("albert").size() == 2);
  CHECK(error_kind([&] { t.row("albert", RowKind::pans); }) == "UnknownReferenceModel");
  CHECK(error_kind([&] { t.row("t5", RowKind::pretrained); }) == "UnknownReferenceModel");
  CHECK(error_kind([] { parse_kind("base"); }) == "UnknownReferenceKind");
}

TEST_CASE("position sums from an independent count") {
  const auto& t = ReferenceTable::bundled();
  auto sum = [&](const char* model, RowKind k) {
    const auto& p = t.row(model, k).positions;
    return std::accumulate(p.begin(), p.end(), 0.0);
  };
  CHECK(sum("bert", RowKind::pretrained) == doctest::Approx(7.96));
  CHECK(sum("bert", RowKind::finetuned) == doctest::Approx(5.77));
  CHECK(sum("xlnet", RowKind::pretrained) == doctest::Approx(9.60));
  CHECK(sum("gpt2", RowKind::finetuned) == doctest::Approx(6.12));
  CHECK(sum("albert", RowKind::pretrained) == doctest::Approx(5.17));
}

TEST_CASE("published averages that disagree with their rows") {
  // Frozen from an independent recomputation of every row mean.
  const std::set<std::pair<std::string, RowKind>> expected{
      {"bert", RowKind::pretrained},    {"bert", RowKind::finetuned},
      {"bert", RowKind::pans},          {"xlnet", RowKind::pretrained},
      {"xlnet", RowKind::pans},         {"gpt2", RowKind::pretrained},
      {"gpt2", RowKind::finetuned},     {"gpt2", RowKind::pans},
      {"roberta", RowKind::pretrained}, {"roberta", RowKind::finetuned},
      {"roberta", RowKind::pans},       {"ernie", RowKind::pretrained},
      {"ernie", RowKind::finetuned},    {"ernie", RowKind::pans}};
  std::set<std::pair<std::string, RowKind>> found;
  for (const auto& g : average_gaps(ReferenceTable::bundled())) {
    CHECK(std::abs(g.positional_mean - g.published_average) > 0.002);
    found.insert({g.model, g.kind});
  }
  CHECK(found == expected);
  const auto& t = ReferenceTable::bundled();
  for (const auto* r : {&t.row("albert", RowKind::pretrained), &t.row("albert", RowKind::finetuned),
                        &t.row("xlnet", RowKind::finetuned)}) {
    CHECK(std::abs(r->positional_mean() - r->published_average) <= 0.002);
  }
}

TEST_CASE("reference runs") {
  const auto run = reference_run("bert", RowKind::pretrained);
  CHECK(run.source_tag == "reference:bert:pretrained");
  CHECK(run.average_accuracy == doctest::Approx(0.398));
  REQUIRE(run.published_average.has_value());
  CHECK(*run.published_average == 0.380);
  CHECK(*run.per_nucleotide_accuracy[0] == 0.516);
  CHECK(*reference_run("bert", RowKind::finetuned).per_nucleotide_accuracy[0] == 0.212);
  CHECK_FALSE(reference_run("albert", RowKind::pretrained).per_nucleotide_accuracy[0].has_value());
  CHECK_FALSE(reference_run("bert", RowKind::pans).per_nucleotide_accuracy[0].has_value());
  CHECK(load_run_source("ref:gpt2:finetuned").source_tag == "reference:gpt2:finetuned");
  CHECK(error_kind([] { load_run_source("ref:gpt2"); }) != "<none>");
}

TEST_CASE("nucleotide references") {
  const auto& refs = bundled_nucleotide_references();
  CHECK(refs.size() == 24);
  const auto albert_a = std::find_if(refs.begin(), refs.end(), [](const auto& r) {
    return r.model == "albert" && r.nucleotide == Nucleotide::A;
  });
  REQUIRE(albert_a != refs.end());
  CHECK_FALSE(albert_a->pretrained.has_value());
  CHECK_FALSE(albert_a->note.empty());
}

TEST_CASE("accuracy formatting") {
  CHECK(format_accuracy(0.45) == ".450");
  CHECK(format_accuracy(1.0) == "1.000");
  CHECK(format_accuracy(0.0) == ".000");
  CHECK(format_delta(0.078) == "+.078");
  CHECK(format_delta(-0.067) == "-.067");
  CHECK(format_delta(0.0) == ".000");
  CHECK(format_delta(-0.0001) == ".000");
}

TEST_CASE("table rows and markers") {
  const auto rows = table_rows({}, {"bert"});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].label == "BERT-base pretrained");
  CHECK(rows[1].label == "BERT-base finetuned");
  CHECK(rows[0].average == 0.380);
  // P1 drops 1.000 -> .250; P6 rises .270 -> .310.
  CHECK(rows[1].marked[0]);
  CHECK_FALSE(rows[1].marked[5]);
  CHECK(std::none_of(rows[0].marked.begin(), rows[0].marked.end(), [](bool b) { return b; }));
  CHECK(error_kind([] { table_rows({}, {"t5"}); }) == "UnknownReferenceModel");

  const auto single = table_rows({reference_run("roberta", RowKind::pretrained)}, {});
  REQUIRE(single.size() == 1);
  CHECK(single[0].average == 0.264);
  const auto md = render_markdown(single);
  CHECK(md.find(".264") != std::string::npos);
  CHECK(md.find("Random baseline: .250") != std::string::npos);
}

TEST_CASE("markdown renders unknown nucleotide values as n/a") {
  const auto albert = reference_run("albert", RowKind::pretrained);
  const auto md = render_markdown(table_rows({albert}, {}), {albert});
  CHECK(md.find("n/a") != std::string::npos);
}

TEST_CASE("CSV round trip holds three decimals") {
  const auto rows = table_rows({}, {"bert", "xlnet", "gpt2", "roberta", "ernie", "albert"});
  const auto back = parse_csv(render_csv(rows));
  REQUIRE(back.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(back[i].label == rows[i].label);
    CHECK(back[i].average == doctest::Approx(rows[i].average).epsilon(5e-4));
    for (std::size_t p = 0; p < 20; ++p) {
      REQUIRE(std::abs(back[i].positions[p] - rows[i].positions[p]) < 5e-4);
    }
  }
  CHECK(render_csv(back) == render_csv(rows));
  CHECK(error_kind([] { parse_csv("source_tag,P1\nx,0.1\n"); }) == "MalformedCsv");
}

TEST_CASE("BERT chart puts the tallest gains at the endpoints") {
  const auto cmp = metrics::privacy_change(reference_run("bert", RowKind::pretrained),
                                           reference_run("bert", RowKind::finetuned));
  const auto svg = render_privacy_chart(cmp);
  CHECK(svg.find(R"(width="800")") != std::string::npos);
  CHECK(svg.find(R"(height="400")") != std::string::npos);
  auto bars = bars_of(svg);
  REQUIRE(bars.size() == 20);
  std::sort(bars.begin(), bars.end(), [](const Bar& a, const Bar& b) { return a.height > b.height; });
  std::set<std::string> top;
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(bars[i].fill == "#2e7d32");
    top.insert(bars[i].position);
  }
  CHECK(top == std::set<std::string>{"P1", "P19", "P20"});
  CHECK(svg == render_privacy_chart(cmp));
}

TEST_CASE("chart edge cases") {
  SUBCASE("all zero") {
    const auto bars = bars_of(render_privacy_chart(comparison_of(std::vector<double>(20, 0.0))));
    REQUIRE(bars.size() == 20);
    for (const auto& b : bars) {
      CHECK(b.height == 0.0);
      CHECK(b.fill == "#9e9e9e");
    }
  }
  SUBCASE("single gain") {
    std::vector<double> d(20, 0.0);
    d[0] = 0.1;
    const auto bars = bars_of(render_privacy_chart(comparison_of(d)));
    REQUIRE(bars.size() == 20);
    CHECK(std::count_if(bars.begin(), bars.end(), [](const Bar& b) { return b.fill == "#2e7d32"; }) == 1);
    CHECK(bars[0].fill == "#2e7d32");
    CHECK(bars[0].height > 0.0);
  }
  SUBCASE("losses are red") {
    std::vector<double> d(20, -0.05);
    const auto bars = bars_of(render_privacy_chart(comparison_of(d)));
    for (const auto& b : bars) CHECK(b.fill == "#c62828");
  }
}

TEST_CASE("compare reproduces the published average deltas") {
  embinv::testing::TempDir dir("report");
  const std::vector<std::pair<std::string, double>> expected{
      {"bert", 0.078}, {"xlnet", 0.198}, {"gpt2", 0.098},
      {"ernie", -0.029}, {"roberta", -0.067}, {"albert", 0.001}};
  for (const auto& [model, delta] : expected) {
    const auto prefix = dir / model;
    const auto cmp = compare_command("ref:" + model + ":pretrained", "ref:" + model + ":finetuned", prefix);
    REQUIRE(cmp.published_average_delta.has_value());
    CHECK(std::abs(*cmp.published_average_delta - delta) <= 0.002);
    for (const char* ext : {".json", ".md", ".svg"}) {
      CHECK(std::filesystem::exists(prefix.string() + ext));
    }
    const auto j = run_io::Json::parse(ingest::read_text_file(prefix.string() + ".json"));
    CHECK(j.at("kind") == "privacy_comparison");
    CHECK(std::abs(j.at("published_average_delta").get<double>() - delta) <= 0.002);
  }
  const auto md = ingest::read_text_file(dir / "roberta.md");
  CHECK(md.find("-.067") != std::string::npos);
}

TEST_CASE("run files with the wrong shape are rejected") {
  embinv::testing::TempDir dir("runio");
  auto j = run_io::Json::parse(run_io::dump(run_io::run_to_json(reference_run("bert", RowKind::pretrained))));
  auto bad = j;
  bad["format_version"] = 2;
  CHECK(error_kind([&] { run_io::run_from_json(bad); }) == "SchemaVersionMismatch");
  bad = j;
  bad["per_position_accuracy"].erase("P20");
  CHECK(error_kind([&] { run_io::run_from_json(bad); }) == "PositionCountMismatch");
  CHECK(error_kind([] { run_io::run_from_json(run_io::Json::array()); }) == "MalformedJson");
  const auto path = dir / "bert.json";
  const auto run = reference_run("bert", RowKind::pretrained);
  run_io::write_run(run, path);
  const auto back = run_io::read_run(path);
  CHECK(back.per_position_accuracy == run.per_position_accuracy);
  CHECK(back.published_average == run.published_average);
  CHECK(run_io::dump(run_io::run_to_json(back)) == ingest::read_text_file(path));
}

}
