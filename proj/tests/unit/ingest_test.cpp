#include <gtest/gtest.h>

#include <filesystem>
#include <random>
#include <set>

#include "arthur/core/error.hpp"
#include "arthur/core/serialize.hpp"
#include "arthur/ingest/ingest.hpp"

using namespace arthur;
using namespace arthur::ingest;
namespace fs = std::filesystem;

namespace {

const fs::path kCorpus = fs::path(ARTHUR_DATA_DIR) / "corpus";

ProcessDocument load(const std::string& rel) { return convert(read_file(kCorpus / rel)); }

bool has_code(const std::vector<Violation>& v, Violation::Code c) {
  return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.code == c; });
}

// Kahn's algorithm over the raw predecessor lists.
bool acyclic(const std::vector<std::vector<int>>& preds) {
  const int n = static_cast<int>(preds.size());
  std::vector<int> indeg(n, 0);
  std::vector<std::vector<int>> succ(n);
  for (int i = 0; i < n; ++i) {
    for (int p : preds[i]) {
      ++indeg[i];
      succ[p].push_back(i);
    }
  }
  std::vector<int> ready;
  for (int i = 0; i < n; ++i)
    if (indeg[i] == 0) ready.push_back(i);
  int seen = 0;
  while (!ready.empty()) {
    const int k = ready.back();
    ready.pop_back();
    ++seen;
    for (int s : succ[k])
      if (--indeg[s] == 0) ready.push_back(s);
  }
  return seen == n;
}

TEST(IngestTest, MoldAssemblyMatchesHandBuiltExpectation) {
  const auto d = load("valid/mold-assembly.xml");
  EXPECT_EQ(d.id, "mold-01");
  ASSERT_EQ(d.tasks.size(), 5u);
  EXPECT_EQ(d.agents, (std::vector<std::string>{"operator", "ur5e"}));
  const std::vector<std::string> ids{"op10", "op20", "op30", "op40", "op50"};
  const std::vector<std::string> agents{"ur5e", "operator", "operator", "ur5e", "operator"};
  const std::vector<std::vector<std::string>> preds{{}, {"op10"}, {"op10"}, {"op20", "op30"}, {"op40"}};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(d.tasks[i].id, ids[i]);
    EXPECT_EQ(d.tasks[i].agent, agents[i]);
    EXPECT_EQ(d.tasks[i].predecessors, preds[i]);
  }
  EXPECT_EQ(d.tasks[0].parts, (std::vector<std::string>{"p-base"}));
  EXPECT_EQ(d.tasks[0].tools, (std::vector<std::string>{"t-grip"}));
  EXPECT_EQ(d.tasks[0].step_anchor, "fixture");
  EXPECT_NEAR(d.tasks[0].step_pose.position().x(), 0.40, 1e-15);
  EXPECT_EQ(d.tasks[0].program.size(), 2u);
  EXPECT_DOUBLE_EQ(d.tasks[0].program[1][0], 0.5);
  EXPECT_EQ(d.tasks[1].image, "images/op20.png");
  EXPECT_EQ(d.tasks[1].description, "Seat the cavity insert into the base plate.");
  EXPECT_EQ(d.tasks[3].sensor_profile.at("pressure"), (std::vector<double>{0.5, 1.0, 1.5, 1.0}));
  EXPECT_EQ(d.parts.size(), 4u);
  EXPECT_EQ(d.parts.at("p-base").anchor, "fixture");
  EXPECT_EQ(d.tools.size(), 2u);
  EXPECT_TRUE(validate(d).empty());
}

TEST(IngestTest, EmptyTaskListIsValid) {
  const auto d = load("valid/empty.xml");
  EXPECT_TRUE(d.tasks.empty());
  EXPECT_TRUE(validate(d).empty());
}

TEST(IngestTest, EveryValidCorpusFileIsDeterministicAndRoundTrips) {
  int files = 0;
  for (const auto& entry : fs::directory_iterator(kCorpus / "valid")) {
    SCOPED_TRACE(entry.path().string());
    const auto text = read_file(entry.path());
    const auto a = canonical(to_json(convert(text)));
    const auto b = canonical(to_json(convert(text)));
    EXPECT_EQ(a, b);
    const auto d = convert(text);
    EXPECT_TRUE(validate(d).empty());
    EXPECT_EQ(canonical(to_json(process_from_json(json::parse(a)))), a);
    ++files;
  }
  EXPECT_GE(files, 5);
}

TEST(IngestTest, StableIdsNormalizeSourceIds) {
  EXPECT_EQ(stable_id("OP10"), "op10");
  EXPECT_EQ(stable_id(" Shaft#1 "), "shaft-1");
  EXPECT_EQ(stable_id("GBX 200"), "gbx-200");
  EXPECT_EQ(stable_id("a.b_c-d"), "a.b_c-d");
}

TEST(IngestTest, MalformedXmlReportsLineAndColumn) {
  try {
    load("malformed/unclosed.xml");
    FAIL() << "expected parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    EXPECT_NE(e.detail().find("line 5, column"), std::string::npos) << e.detail();
  }
}

TEST(IngestTest, MissingFieldNamesElementPath) {
  try {
    load("malformed/missing-id.xml");
    FAIL() << "expected validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
    EXPECT_EQ(e.detail(), "/process/bop[1]/operation[2]/@id: missing");
  }
}

TEST(IngestTest, WrongArityIsFieldPathError) {
  try {
    load("malformed/bad-waypoint.xml");
    FAIL() << "expected validation error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
    EXPECT_NE(e.detail().find("/process/bop[1]/operation[1]/waypoint[1]/@q"), std::string::npos);
  }
}

TEST(IngestTest, UnknownPartNamesTheRef) {
  const auto v = validate(load("malformed/unknown-part.xml"));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].code, Violation::Code::dangling_reference);
  EXPECT_EQ(v[0].property, "tasks/1/parts/0");
  EXPECT_NE(v[0].message.find("'p9'"), std::string::npos);
}

TEST(IngestTest, DuplicateAndCycleAreViolations) {
  EXPECT_TRUE(has_code(validate(load("malformed/duplicate-id.xml")), Violation::Code::duplicate_id));
  const auto v = validate(load("malformed/cycle.xml"));
  ASSERT_TRUE(has_code(v, Violation::Code::cycle));
  EXPECT_NE(v.back().message.find("a -> b -> a"), std::string::npos) << v.back().message;
}

TEST(IngestTest, DuplicateBomIdIsFieldPathError) {
  const std::string xml =
      R"(<process id="p"><bom><part id="x"/><tool id="t"/><part id="X"/></bom></process>)";
  try {
    convert(xml);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
    EXPECT_EQ(e.detail(), "/process/bom[1]/part[2]/@id: duplicate part id 'x'");
  }
}

TEST(IngestTest, RandomGraphsValidateIffAcyclic) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 200; ++round) {
    const int n = 1 + static_cast<int>(rng() % 12);
    std::vector<std::vector<int>> preds(n);
    std::string xml = "<process id=\"r\"><bop>";
    for (int i = 0; i < n; ++i) {
      xml += "<operation id=\"T" + std::to_string(i) + "\">";
      std::set<int> ps;
      const int k = static_cast<int>(rng() % 3);
      for (int j = 0; j < k; ++j) {
        // Mostly backward edges; occasionally a forward one that may close a cycle.
        const int p = (rng() % 8 == 0) ? static_cast<int>(rng() % n) : (i == 0 ? -1 : static_cast<int>(rng() % i));
        if (p >= 0 && p != i) ps.insert(p);
      }
      for (int p : ps) {
        preds[i].push_back(p);
        xml += "<predecessor ref=\"t" + std::to_string(p) + "\"/>";
      }
      xml += "</operation>";
    }
    xml += "</bop></process>";
    const auto v = validate(convert(xml));
    EXPECT_EQ(v.empty(), acyclic(preds)) << xml;
  }
}

TEST(IngestTest, IngestFileExitCodes) {
  const auto out = fs::temp_directory_path() / "arthur-ingest-test.json";
  fs::remove(out);
  EXPECT_EQ(ingest_file(kCorpus / "valid/mold-assembly.xml", out).exit_code, 0);
  EXPECT_EQ(canonical(json::parse(read_file(out))), canonical(to_json(load("valid/mold-assembly.xml"))));
  EXPECT_EQ(ingest_file(kCorpus / "malformed/unclosed.xml", out).exit_code, 2);
  EXPECT_EQ(ingest_file(kCorpus / "malformed/missing-id.xml", out).exit_code, 1);
  EXPECT_EQ(ingest_file(kCorpus / "malformed/cycle.xml", out).exit_code, 1);
  EXPECT_EQ(ingest_file(kCorpus / "malformed/unknown-part.xml", out).exit_code, 1);
  fs::remove(out);
}

}  // namespace
