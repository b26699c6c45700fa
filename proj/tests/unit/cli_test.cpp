#include "codm/cli/session.hpp"
#include "codm/io/text.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace codm::cli {
namespace {

const char* kObjScript = R"(concept Sizes { label: String }
concept Colors { name: String }
concept Objects { size: Sizes, colour: Colors }
Sizes <"small">
Sizes <"large">
Colors <"green">
Colors <"red">
Objects <Sizes#1, Colors#2>
Objects <Sizes#2, Colors#1>
Objects <Sizes#2, Colors#2>
)";

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(Session& s, const std::string& script) {
    std::ostringstream out, err;
    const int code = s.run_script(script, out, err);
    return {code, out.str(), err.str()};
}

TEST(Script, BuildAndQuery) {
    Session s;
    const auto r = run(s, std::string(kObjScript) + "{c:Objects} <c.size.label, c.colour.name>\n");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("(3 rows)"), std::string::npos) << r.out;
}

TEST(Script, EmptyScript) {
    Session s;
    const auto r = run(s, "");
    EXPECT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
}

TEST(Script, CycleNamesTheLine) {
    Session s;
    const auto r = run(s, "concept A { b: B }\nconcept B { a: A }\n");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("CycleDetected"), std::string::npos) << r.err;
}

TEST(Script, StopsAtFirstError) {
    Session s;
    const auto r = run(s, std::string(kObjScript) + "{c:Objects | }\nSizes <\"medium\">\n");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("line 11"), std::string::npos) << r.err;
    EXPECT_EQ(s.db()->store().size(s.db()->schema().id_of("Sizes")), 2u);
}

TEST(Repl, InferPrintsRed) {
    Session s;
    run(s, kObjScript);
    std::istringstream in("infer Sizes={Sizes#1} -> Colors\nquit\n");
    std::ostringstream out, err;
    s.repl(in, out, err, false);
    EXPECT_NE(out.str().find("red"), std::string::npos) << out.str();
    EXPECT_EQ(out.str().find("green"), std::string::npos) << out.str();
}

TEST(Repl, ErrorsLeaveStateUnchanged) {
    Session s;
    run(s, kObjScript);
    const auto before = io::save_snapshot(*s.db());
    std::istringstream in("{c:Objects |\n}\nObjects <Sizes#9, Colors#1>\ndelete Nope#1\ngc\nquit\n");
    std::ostringstream out, err;
    s.repl(in, out, err, false);
    EXPECT_FALSE(err.str().empty());
    EXPECT_NE(out.str().find("(none)"), std::string::npos) << out.str();
    EXPECT_EQ(io::save_snapshot(*s.db()), before);
}

TEST(Repl, ScriptAndReplAgree) {
    Session a, b;
    run(a, kObjScript);
    std::istringstream in(kObjScript);
    std::ostringstream out, err;
    b.repl(in, out, err, false);
    EXPECT_EQ(io::save_snapshot(*a.db()), io::save_snapshot(*b.db()));
}

TEST(Render, Formats) {
    Session s(Format::csv);
    auto r = run(s, std::string(kObjScript) + "{c:Objects | c.size.label == \"small\"} <c, c.size.label>\n");
    EXPECT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("Objects#1,small"), std::string::npos) << r.out;
    s.set_format(Format::jsonl);
    std::ostringstream out;
    s.execute("{c:Objects | c.size.label == \"small\"} <c.colour.name>", out);
    EXPECT_NE(out.str().find("\"red\""), std::string::npos) << out.str();
    EXPECT_EQ(parse_format("jsonl"), Format::jsonl);
    EXPECT_FALSE(parse_format("xml"));
}

} // namespace
} // namespace codm::cli
