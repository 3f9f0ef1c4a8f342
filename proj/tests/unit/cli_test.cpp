#include "boundforge/cli.hpp"
#include "boundforge/oracle.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace boundforge;
using nlohmann::json;

namespace {

struct Run {
    int rc;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args, const cli::Hooks& hooks = cli::default_hooks())
{
    std::ostringstream out, err;
    const int rc = cli::run(args, out, err, hooks);
    return {rc, out.str(), err.str()};
}

std::string temp_file(const std::string& name, const std::string& body)
{
    const auto p = std::filesystem::temp_directory_path() / ("boundforge_" + name);
    std::ofstream(p) << body;
    return p.string();
}

class EnvGuard {
public:
    explicit EnvGuard(const char* v) { setenv("BOUNDFORGE_MAX_N", v, 1); }
    ~EnvGuard() { unsetenv("BOUNDFORGE_MAX_N"); }
};

} // namespace

TEST(CliVerify, BinSeqOneToTwelve)
{
    const auto r = run({"verify", "--object", "binseq", "--n", "1..12"});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["violations"], 0);
    ASSERT_EQ(j["audits"].size(), 17u);
    for (const auto& a : j["audits"]) {
        ASSERT_EQ(a["rows"].size(), 12u);
        EXPECT_EQ(a["instances"], (1u << 13) - 2);
    }
}

TEST(CliVerify, SingleBound)
{
    const auto r = run({"verify", "--bound", "P-S-UB", "--n", "8", "--format", "csv"});
    ASSERT_EQ(r.rc, 0);
    // p(8) = 22
    EXPECT_EQ(r.out, "bound,n,instances,violations,witnesses,min_slack\nP-S-UB,8,22,0,"
                     + std::to_string(oracle::audit(find_bound("P-S-UB"), 8).rows[0].witnesses) + ",0\n");
}

TEST(CliVerify, UnknownBoundIsUsage)
{
    const auto r = run({"verify", "--bound", "P-NOPE"});
    EXPECT_EQ(r.rc, 2);
    EXPECT_NE(r.err.find("P-NOPE"), std::string::npos);
}

TEST(CliVerify, ObjectBoundMismatchIsUsage)
{
    EXPECT_EQ(run({"verify", "--object", "binseq", "--bound", "P-S-UB"}).rc, 2);
}

TEST(CliVerify, PartitionZeroIsUsage)
{
    EXPECT_EQ(run({"verify", "--object", "partition", "--n", "0..3"}).rc, 2);
}

TEST(CliUsage, BadFormatAndMissingSubcommand)
{
    EXPECT_EQ(run({"select", "--object", "binseq", "--n", "3", "--format", "xml"}).rc, 2);
    EXPECT_EQ(run({}).rc, 2);
    EXPECT_EQ(run({"select", "--object", "tree", "--n", "3"}).rc, 2);
    EXPECT_EQ(run({"select", "--object", "binseq", "--n", "3x"}).rc, 2);
    EXPECT_EQ(run({"select", "--object", "binseq", "--n", "3..4"}).rc, 2);
}

TEST(CliUsage, HelpIsZero)
{
    const auto r = run({"--help"});
    EXPECT_EQ(r.rc, 0);
    EXPECT_NE(r.out.find("verify"), std::string::npos);
}

TEST(CliSelect, PartitionFive)
{
    const auto r = run({"select", "--object", "partition", "--n", "5", "--no-timing"});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_EQ(j["selected"], json::array({"P-RANGE-UB1"}));
    EXPECT_EQ(j["wall_ms"], 0);
    EXPECT_GT(j["posts"].get<int>(), 0);
    EXPECT_GT(j["labelings"].get<int>(), 0);
}

TEST(CliSelect, SeededShuffleIsByteDeterministic)
{
    const std::vector<std::string> args{"select", "--object", "binseq", "--n", "6", "--shuffle-seed", "7", "--no-timing"};
    const auto a = run(args), b = run(args);
    ASSERT_EQ(a.rc, 0);
    EXPECT_EQ(a.out, b.out);
    auto other = args;
    other[6] = "8";
    const auto c = run(other);
    EXPECT_FALSE(json::parse(a.out)["selected"].empty());
    EXPECT_EQ(c.rc, 0);
}

TEST(CliSelect, EmptyCandidateFile)
{
    const auto path = temp_file("empty.txt", "# nothing here\n\n");
    const auto r = run({"select", "--object", "binseq", "--n", "4", "--candidates", path, "--no-timing"});
    ASSERT_EQ(r.rc, 0) << r.err;
    EXPECT_EQ(json::parse(r.out)["selected"], json::array());
}

TEST(CliSelect, CandidateFileWithDuplicatesAndDecoys)
{
    const auto path = temp_file("mixed.txt", "decoy:S\nP-RANGE-UB1  # again below\nP-RANGE-UB1\nP-S-UB\n");
    const auto r = run({"select", "--object", "partition", "--n", "5", "--candidates", path});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto sel = json::parse(r.out)["selected"];
    EXPECT_EQ(sel, json::array({"P-RANGE-UB1"}));
}

TEST(CliSelect, CandidateFileErrors)
{
    const auto unknown = temp_file("unknown.txt", "B-NOPE\n");
    EXPECT_EQ(run({"select", "--object", "binseq", "--n", "4", "--candidates", unknown}).rc, 2);
    const auto wrong = temp_file("wrong.txt", "P-S-UB\n");
    EXPECT_EQ(run({"select", "--object", "binseq", "--n", "4", "--candidates", wrong}).rc, 2);
    const auto feat = temp_file("feat.txt", "decoy:Q\n");
    EXPECT_EQ(run({"select", "--object", "binseq", "--n", "4", "--candidates", feat}).rc, 2);
    EXPECT_EQ(run({"select", "--object", "binseq", "--n", "4", "--candidates", "/nonexistent/x"}).rc, 2);
}

TEST(CliSelect, OutWritesFile)
{
    const auto path = (std::filesystem::temp_directory_path() / "boundforge_out.json").string();
    std::filesystem::remove(path);
    const auto r = run({"select", "--object", "binseq", "--n", "3", "--out", path, "--no-timing"});
    ASSERT_EQ(r.rc, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(path);
    const auto j = json::parse(in);
    EXPECT_TRUE(j.contains("selected"));
}

TEST(CliSelect, CsvAndText)
{
    const auto csv = run({"select", "--object", "partition", "--n", "4", "--format", "csv", "--no-timing"});
    ASSERT_EQ(csv.rc, 0);
    EXPECT_EQ(csv.out.substr(0, csv.out.find('\n')), "selected,posts,labelings,wall_ms");
    const auto text = run({"select", "--object", "partition", "--n", "4", "--format", "text"});
    EXPECT_NE(text.out.find("P-RANGE-UB1"), std::string::npos);
}

TEST(CliEnv, MaxNCaps)
{
    {
        EnvGuard g("4");
        EXPECT_EQ(run({"select", "--object", "binseq", "--n", "5"}).rc, 2);
        EXPECT_EQ(run({"select", "--object", "binseq", "--n", "4", "--no-timing"}).rc, 0);
        EXPECT_EQ(run({"verify", "--object", "binseq", "--n", "1..5"}).rc, 2);
    }
    {
        EnvGuard g("lots");
        EXPECT_EQ(run({"select", "--object", "binseq", "--n", "3"}).rc, 2);
    }
    // default caps without the variable
    EXPECT_EQ(run({"select", "--object", "partition", "--n", "9"}).rc, 2);
}

TEST(CliCompare, IdenticalAndCounters)
{
    const auto r = run({"compare", "--object", "binseq", "--n", "5", "--no-timing"});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto j = json::parse(r.out);
    EXPECT_TRUE(j["identical"].get<bool>());
    EXPECT_EQ(j["incremental"]["selected"], j["baseline"]["selected"]);
    EXPECT_GE(j["baseline"]["posts"].get<int>(), j["incremental"]["posts"].get<int>());
    EXPECT_LE(j["posts_ratio"].get<double>(), 1.0);
}

TEST(CliCompare, MutantSelectorExitsOne)
{
    auto hooks = cli::default_hooks();
    const auto real = hooks.incremental;
    hooks.incremental = [real](const CtrSpec& c, std::span<const Candidate> b) {
        auto r = real(c, b);
        if (!r.selected.empty())
            r.selected.pop_back();
        return r;
    };
    const auto r = run({"compare", "--object", "binseq", "--n", "4", "--format", "text"}, hooks);
    EXPECT_EQ(r.rc, 1);
    EXPECT_NE(r.out.find("MISMATCH"), std::string::npos);
}

TEST(CliSolutions, BinSeqThree)
{
    const auto r = run({"solutions", "--object", "binseq", "--n", "3"});
    ASSERT_EQ(r.rc, 0) << r.err;
    const auto j = json::parse(r.out);
    const auto tuples = oracle::feasible_tuples(ObjectKind::BinSeq, 3);
    ASSERT_EQ(tuples.size(), 5u);
    for (const char* side : {"with_bounds", "without_bounds"}) {
        const auto& lex = j[side]["lex"];
        ASSERT_EQ(lex.size(), 6u);
        std::size_t i = 0;
        for (const auto& t : tuples)
            EXPECT_EQ(lex[i++]["sol"].get<std::vector<Value>>(), t);
        EXPECT_TRUE(lex[5]["sol"].empty());
        EXPECT_EQ(j[side]["sorted"].size(), 6u);
    }
    EXPECT_TRUE(j.contains("nback_dominated"));
}

TEST(CliSolutions, CsvHasSentinelRows)
{
    const auto r = run({"solutions", "--object", "binseq", "--n", "3", "--format", "csv"});
    ASSERT_EQ(r.rc, 0);
    EXPECT_NE(r.out.find("with_bounds,lex,5,"), std::string::npos);
    std::istringstream in(r.out);
    std::string line;
    int rows = 0;
    while (std::getline(in, line))
        ++rows;
    EXPECT_EQ(rows, 1 + 4 * 6);
}

TEST(CliExplain, CatalogAndOne)
{
    const auto all = run({"explain"});
    ASSERT_EQ(all.rc, 0);
    const auto j = json::parse(all.out);
    ASSERT_EQ(j.size(), 20u);
    for (const auto& e : j)
        for (const char* k : {"id", "object", "target", "direction", "rhs"})
            EXPECT_TRUE(e.contains(k));

    const auto one = run({"explain", "B-N1-UB"});
    ASSERT_EQ(one.rc, 0);
    const auto b = json::parse(one.out);
    EXPECT_EQ(b["id"], "B-N1-UB");
    EXPECT_EQ(b["target"], "N1");
    EXPECT_FALSE(b["label"].get<std::string>().empty());

    const auto text = run({"explain", "P-S-UB", "--format", "text"});
    EXPECT_NE(text.out.find("let\n"), std::string::npos);
    EXPECT_EQ(run({"explain", "X-1"}).rc, 2);
}
