#include "kd/cli.hpp"
#include "kd/io.hpp"

#include <gtest/gtest.h>

#include <regex>

using namespace kd;

namespace {

std::string data(const std::string& f) { return std::string(KD_TEST_DATA) + "/" + f; }

/// Every catalogue entry with the parameter values the table uses.
std::vector<CatalogueRef> catalogue_refs() {
    std::vector<CatalogueRef> out;
    for (auto& e : catalogue())
        for (int n : e.needs_n ? std::vector<int>{-2, 0, 1, 3} : std::vector<int>{0})
            for (int m : e.needs_m ? std::vector<int>{0, 1, 2} : std::vector<int>{0}) out.push_back({e.name, {n, m}});
    return out;
}

template <class F>
ParseError expect_parse_error(const std::string& text, F&& check) {
    try {
        parse_input(text);
    } catch (const ParseError& e) {
        check(e);
        return e;
    }
    ADD_FAILURE() << "no parse error for:\n" << text;
    return ParseError(0, 0, "");
}

cli::RunResult run(std::vector<std::string> args, cli::JobSpec base = {}) {
    base.command = args.at(0);
    if (args.size() > 1) base.input = args[1];
    return cli::run(base);
}

} // namespace

TEST(InputFormat, ParseOfSerializeIsIdentityOnCatalogue) {
    for (auto& ref : catalogue_refs()) {
        SCOPED_TRACE(ref.name + " n=" + std::to_string(ref.params.n));
        std::string text = serialize_entry(ref);
        InputFile f = parse_input(text);
        if (auto p = catalogue_presentation(ref.name, ref.params)) {
            ModulePresentation want = *p;
            want.name = ref.name;
            ASSERT_TRUE(f.module.has_value());
            EXPECT_TRUE(same_presentation(*f.module, want));
            EXPECT_EQ(serialize(*f.module), text);
        } else {
            ASSERT_TRUE(f.reference.has_value());
            const auto& e = catalogue_entry(ref.name);
            CatalogueRef want{ref.name, {e.needs_n ? ref.params.n : 0, e.needs_m ? ref.params.m : 0}};
            EXPECT_EQ(*f.reference, want);
            EXPECT_EQ(serialize(*f.reference), text);
        }
    }
}

TEST(InputFormat, HandWrittenCharacterParsesAndValidates) {
    InputFile f = parse_input_file(data("character_k1.kd"));
    ASSERT_TRUE(f.module.has_value());
    EXPECT_EQ(f.module->name, "k1");
    EXPECT_EQ(f.job.get("command").value_or(""), "dualize");
    Window w{-4, 4, -3, 3, 0};
    OpModule m = realize(*f.module, w);
    EXPECT_TRUE(validate_equivariant(m).ok());
    // agrees with the catalogue's character piece by piece
    auto got = cohomology(m.complex());
    auto want = cohomology(build_entry("bgm.character", {1, 0}, w).complex());
    EXPECT_EQ(got.nonzero_certified(), want.nonzero_certified());
    // serialize -> parse is stable
    InputFile g = parse_input(serialize(*f.module));
    EXPECT_TRUE(same_presentation(*f.module, *g.module));
}

TEST(InputFormat, HandWrittenResolutionMatchesCatalogue) {
    InputFile f = parse_input_file(data("skyscraper_custom.kd"));
    ModulePresentation want = *catalogue_presentation("bgm.skyscraper", {2, 0});
    want.name = "sky2";
    EXPECT_TRUE(same_presentation(*f.module, want));
}

TEST(InputFormat, UseLineBuildsEntry) {
    InputFile f = parse_input("use bgm.skyscraper n=2\n");
    ASSERT_TRUE(f.reference.has_value());
    EXPECT_EQ(f.reference->params.n, 2);
    ASSERT_TRUE(f.module.has_value());
    EXPECT_TRUE(validate_equivariant(realize(*f.module, Window{-4, 4, -4, 4, 0})).ok());
    InputFile g = parse_input("use bgm.infinitesimal m=2  # comment\n");
    EXPECT_FALSE(g.module.has_value());
    EXPECT_EQ(g.reference->params.m, 2);
}

TEST(InputFormat, RationalCoefficientsAndPowers) {
    InputFile f = parse_input("[algebra]\nkind = bgm_block\nn = 0\n[module]\nfree = x\n"
                              "gen a d=0 w=0 a=0\ngen b d=-1 w=-2 a=0\ndiff: b -> -3/4*x^2*a\n");
    const auto& p = *f.module;
    const ModuleVector& v = p.diff.at(1);
    ASSERT_EQ(v.size(), 1u);
    Monomial x2 = p.algebra.one();
    x2[p.algebra.index("x")] = 2;
    EXPECT_EQ(v[0].coef.at(x2), Q(-3) / Q(4));
}

TEST(InputErrors, UnknownSectionHasPosition) {
    expect_parse_error("[algebra]\nkind = bgm_block\n\n  [modul]\n", [](const ParseError& e) {
        EXPECT_EQ(e.line, 4);
        EXPECT_EQ(e.column, 4);
        EXPECT_NE(std::string(e.what()).find("modul"), std::string::npos);
    });
}

TEST(InputErrors, DuplicateGenerator) {
    expect_parse_error("[algebra]\nkind = bgm_block\n[module]\ngen e d=0 w=0 a=0\ngen e d=1 w=0 a=0\n",
                       [](const ParseError& e) {
                           EXPECT_EQ(e.line, 5);
                           EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
                       });
}

TEST(InputErrors, NonHomogeneousRelationNamesBothSides) {
    // d has shift (1,0,0): d(y) must sit at (2,0,0) but x sits at (0,1,0)
    expect_parse_error("[algebra]\nkind = custom\ngen x d=0 w=1 a=0\ngen y d=1 w=0 a=0\ndiff: y -> x\n"
                       "[module]\ngen e d=0 w=0 a=0\n",
                       [](const ParseError& e) {
                           std::string msg = e.what();
                           EXPECT_EQ(e.line, 5);
                           EXPECT_NE(msg.find("(2,0,0)"), std::string::npos) << msg;
                           EXPECT_NE(msg.find("(0,1,0)"), std::string::npos) << msg;
                       });
    expect_parse_error("[algebra]\nkind = bgm_block\nn = 1\n[module]\ngen e d=0 w=0 a=0\ngen f d=0 w=0 a=0\n"
                       "act x: e -> f\n",
                       [](const ParseError& e) {
                           std::string msg = e.what();
                           EXPECT_EQ(e.line, 7);
                           EXPECT_EQ(e.column, 12);
                           EXPECT_NE(msg.find("(0,-1,0)"), std::string::npos) << msg;
                           EXPECT_NE(msg.find("(0,0,0)"), std::string::npos) << msg;
                       });
}

TEST(InputErrors, MalformedExpressions) {
    const std::string head = "[algebra]\nkind = bgm_block\n[module]\ngen e d=0 w=0 a=0\n";
    expect_parse_error(head + "act x: e -> 2 $ e\n", [](const ParseError& e) {
        EXPECT_EQ(e.line, 5);
        EXPECT_EQ(e.column, 15);
    });
    expect_parse_error(head + "act q: e -> e\n", [](const ParseError& e) { EXPECT_EQ(e.line, 5); });
    expect_parse_error(head + "diff: e -> x\n", [](const ParseError& e) {
        EXPECT_NE(std::string(e.what()).find("no module generator"), std::string::npos);
    });
    expect_parse_error(head + "gen f d=zero w=0 a=0\n", [](const ParseError& e) { EXPECT_EQ(e.line, 5); });
    expect_parse_error("use nosuch.entry\n", [](const ParseError& e) { EXPECT_EQ(e.column, 5); });
    expect_parse_error("kind = bgm_block\n", [](const ParseError& e) { EXPECT_EQ(e.line, 1); });
}

TEST(Cli, SpencerAcyclicityExample) {
    cli::JobSpec j;
    j.n = 1;
    j.lemmas = {"spencer"};
    j.window = parse_window("d=-6..6,w=-6..6,a=8");
    auto r = run({"verify-acyclicity"}, j);
    EXPECT_EQ(r.exit_code, cli::ok) << r.err;
    EXPECT_NE(r.out.find("PASS"), std::string::npos);
    EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, CharacterTableRowExample) {
    cli::JobSpec j;
    j.n = 3;
    auto r = run({"verify-table", "bgm.character"}, j);
    EXPECT_EQ(r.exit_code, cli::ok) << r.out << r.err;
    EXPECT_NE(r.out.find("un-specialization acyclic"), std::string::npos) << r.out;
}

TEST(Cli, CohomologyOfZeroIsEmpty) {
    cli::JobSpec j;
    j.format = cli::Format::machine;
    auto r = run({"cohomology", "zero"}, j);
    EXPECT_EQ(r.exit_code, cli::ok);
    EXPECT_EQ(r.out, "");
}

TEST(Cli, MachineOutputIsCanonicalAndScheduleIndependent) {
    const std::regex record(R"(piece d=-?\d+ w=-?\d+ a=\d+ dim=\d+ status=(certified|boundary))");
    for (std::string cmd : {"dualize", "cohomology", "verify-roundtrip"}) {
        SCOPED_TRACE(cmd);
        std::string first;
        for (int jobs : {1, 4, 1, 3}) {
            cli::JobSpec j;
            j.format = cli::Format::machine;
            j.jobs = jobs;
            j.m = 2;
            j.window = parse_window("d=-6..6,w=-4..4,a=0");
            auto r = run({cmd, "bgm.infinitesimal"}, j);
            ASSERT_EQ(r.exit_code, cli::ok) << r.err;
            if (first.empty()) first = r.out;
            EXPECT_EQ(r.out, first);
        }
        std::istringstream in(first);
        std::string line;
        std::vector<Trigrade> order;
        while (std::getline(in, line)) {
            if (line.rfind("piece", 0) != 0) continue;
            EXPECT_TRUE(std::regex_match(line, record)) << line;
            int d, w, a;
            std::sscanf(line.c_str(), "piece d=%d w=%d a=%d", &d, &w, &a);
            order.push_back({d, w, a});
        }
        EXPECT_FALSE(order.empty());
        EXPECT_TRUE(std::is_sorted(order.begin(), order.end()));
        EXPECT_EQ(std::adjacent_find(order.begin(), order.end()), order.end());
    }
}

TEST(Cli, JobSectionSuppliesCommandAndWindow) {
    cli::JobSpec j;
    j.input = data("character_k1.kd");
    j.format = cli::Format::machine;
    auto r = cli::run(j);
    EXPECT_EQ(r.exit_code, cli::ok) << r.err;
    // kappa(k(1)) has a single certified class, at the origin
    EXPECT_EQ(r.out, "piece d=0 w=0 a=0 dim=1 status=certified\n");
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run({"cohomology", "no.such.entry"}).exit_code, cli::input_invalid);
    EXPECT_EQ(run({"frobnicate", "zero"}).exit_code, cli::input_invalid);
    EXPECT_EQ(run({"verify-roundtrip", "bgm.free_dual"}).exit_code, cli::input_invalid);
    cli::JobSpec big;
    big.window = Window{-1000, 1000, -500, 500, 8};
    EXPECT_EQ(run({"cohomology", "zero"}, big).exit_code, cli::window_overflow);
    // a module with cohomology is not acyclic
    cli::JobSpec j;
    j.n = 1;
    EXPECT_EQ(run({"verify-acyclicity", "bgm.character"}, j).exit_code, cli::verification_failed);
    // missing oracle fixtures are a failed verification, never a pass
    cli::JobSpec nf;
    nf.n = 3;
    nf.fixtures = "/nonexistent/fixtures";
    EXPECT_EQ(run({"verify-table", "bgm.character"}, nf).exit_code, cli::verification_failed);
}

TEST(Cli, MatrixFactorizationExtraction) {
    auto r = run({"mf-extract", "bga.skyscraper"});
    EXPECT_EQ(r.exit_code, cli::ok) << r.err;
    EXPECT_NE(r.out.find("potential w = x*y"), std::string::npos) << r.out;
    EXPECT_EQ(run({"mf-extract", "bgm.omega_formal"}).exit_code, cli::input_invalid);
}

TEST(Cli, CatalogueListNamesEveryEntry) {
    cli::JobSpec j;
    j.format = cli::Format::machine;
    auto r = run({"catalogue-list"}, j);
    for (auto& e : catalogue()) EXPECT_NE(r.out.find("name=" + e.name + " "), std::string::npos) << e.name;
}
