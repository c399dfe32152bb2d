#include "catch_amalgamated.hpp"

#include <algorithm>

#include "helpers.hpp"
#include "zdistill/protocol.hpp"
#include "zdistill/qubit_model.hpp"

using namespace zdistill;

namespace {

const char* kOneWay = R"(# one cycle
prepare X up
interact X A 0.9
free 0.25
interact X B 1.4
free 0.6
project X up
)";

const char* kRoundTrip = R"(prepare X down
interact X A 1.5707963267948966
free 0.3
project X up
interact X B 0.7
free 0.4
project X down
interact X B 0.7
free 0.3
interact X A 1.5707963267948966
project X down
)";

std::size_t error_line(const std::string& text) {
    try {
        parse_program(text);
    } catch (const ParseError& e) {
        return e.line();
    }
    return 9999;
}

qubit::QubitParams sample_params() {
    qubit::QubitParams p;
    p.omega = 1.3;
    p.g_a = 0.7;
    p.g_b = 1.1;
    p.t_a = 0.9;
    p.t_b = 1.4;
    p.tau_a = 0.25;
    p.tau_b = 0.6;
    return p;
}

} // namespace

TEST_CASE("parse a single-measurement cycle") {
    const auto prog = parse_program(kOneWay);
    REQUIRE(prog.size() == 6);
    CHECK(prog.mediator() == "X");
    CHECK(prog.steps()[0].kind == StepKind::Prepare);
    CHECK(prog.steps()[1].kind == StepKind::Interact);
    CHECK(prog.steps()[1].target == "A");
    CHECK(prog.steps()[1].duration == 0.9);
    CHECK(prog.steps()[2].kind == StepKind::Free);
    CHECK(prog.steps()[5].kind == StepKind::Project);
    CHECK(prog.steps()[5].line == 7);
    CHECK(parse_program(kRoundTrip).size() == 11);
}

TEST_CASE("parse errors carry line numbers") {
    CHECK_THROWS_AS(parse_program(""), ParseError);
    CHECK_THROWS_AS(parse_program("# nothing\n\n"), ParseError);
    CHECK(error_line("prepare X up\nwiggle X 1\nproject X up\n") == 2);
    CHECK(error_line("prepare X up\nfree -1\nproject X up\n") == 2);
    CHECK(error_line("prepare X up\nfree abc\nproject X up\n") == 2);
    CHECK(error_line("prepare X up\nfree 1\nprepare X up\nproject X up\n") == 3);
    CHECK(error_line("prepare X up\nfree 1\n") == 2);
    CHECK(error_line("free 1\nproject X up\n") == 1);
    CHECK(error_line("prepare X up\ninteract Y A 1\nproject X up\n") == 2);
    CHECK(error_line("prepare X up\ninteract X X 1\nproject X up\n") == 2);
    CHECK(error_line("prepare X up extra\nproject X up\n") == 1);
}

TEST_CASE("text round trip") {
    for (const char* src : {kOneWay, kRoundTrip}) {
        const auto prog = parse_program(src);
        const auto again = parse_program(to_text(prog));
        CHECK(again.steps() == prog.steps());
    }
    const auto built = ProgramBuilder("X").prepare("up").interact("A", 0.1 + 0.2).free(1.0 / 3.0).project("down").build();
    CHECK(parse_program(to_text(built)).steps() == built.steps());
}

TEST_CASE("zero durations compile to the overlap of the two mediator states") {
    const auto b = qubit::binding(sample_params());
    const auto same = compile_cycle(parse_program("prepare X up\ninteract X A 0\nfree 0\nproject X up\n"), b);
    CHECK(max_abs(same.matrix - ComplexMatrix::Identity(4, 4)) < 1e-15);
    const auto other = compile_cycle(parse_program("prepare X up\ninteract X A 0\nproject X down\n"), b);
    CHECK(max_abs(other.matrix) < 1e-15);
}

TEST_CASE("unknown labels are compile errors") {
    const auto b = qubit::binding(sample_params());
    CHECK_THROWS_AS(compile_cycle(parse_program("prepare X up\ninteract X C 1\nproject X up\n"), b), CompileError);
    CHECK_THROWS_AS(compile_cycle(parse_program("prepare X sideways\nproject X up\n"), b), CompileError);
    CHECK_THROWS_AS(compile_cycle(parse_program("prepare Y up\nproject Y up\n"), b), CompileError);
}

TEST_CASE("reversed program with negated generators gives the adjoint") {
    const auto p = sample_params();
    const auto b = qubit::binding(p);
    const auto prog = parse_program(kRoundTrip);
    const auto v = compile_cycle(prog, b);

    std::vector<ProtocolStep> rev(prog.steps().rbegin(), prog.steps().rend());
    rev.front().kind = StepKind::Prepare;
    rev.back().kind = StepKind::Project;
    ModelBinding nb = b;
    nb.free_hamiltonian = b.free_hamiltonian * -1.0;
    for (auto& [label, h] : nb.interactions) h = h * -1.0;
    const auto w = compile_cycle(ProtocolProgram::from_steps(rev), nb);
    CHECK(max_abs(w.matrix - v.matrix.adjoint()) < 1e-13);
}

TEST_CASE("one interaction reproduces the mediator-state amplitude") {
    std::mt19937_64 rng(5);
    ModelBinding b;
    b.mediator = "X";
    b.mediator_states["up"] = qubit::detail::ket(1.0, 0.0);
    b.rest_dim = 3;
    b.free_hamiltonian = HermitianOperator::zero(6);
    const ComplexMatrix h = testutil::random_hermitian(rng, 6);
    b.interactions["S"] = HermitianOperator(h);
    const double tau = 0.8;
    const auto v = compile_cycle(ProgramBuilder("X").prepare("up").interact("S", tau).project("up").build(), b);
    CHECK(max_abs(v.matrix - testutil::taylor_expm(h, tau).topLeftCorner(3, 3)) < 1e-11);
}

TEST_CASE("compiled cycles are contractions") {
    ComplexMatrix m = 2.0 * ComplexMatrix::Identity(2, 2);
    const auto prog = parse_program("prepare X up\nproject X up\n");
    CHECK_THROWS_AS(CompiledCycle(m, prog), InvariantViolation);
    std::mt19937_64 rng(9);
    for (int k = 0; k < 5; ++k) {
        qubit::QubitParams p;
        std::uniform_real_distribution<double> u(0.1, 2.0);
        p.omega = u(rng);
        p.g_a = u(rng);
        p.g_b = u(rng);
        p.t_a = u(rng);
        p.t_b = u(rng);
        p.tau_a = u(rng);
        p.tau_b = u(rng);
        CHECK(spectral_radius(qubit::qubit_operator(p).matrix) <= 1.0 + 1e-12);
    }
}
