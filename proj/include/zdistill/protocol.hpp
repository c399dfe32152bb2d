#pragma once

// Line-oriented protocol language (.qproto) and its compilation into the
// kept-outcome operator acting on the unmeasured subsystems.
//
//   prepare  X <state>
//   interact X <sys> <duration>
//   free     <duration>
//   project  X <state>
//
// '#' starts a comment. The first step must be `prepare`, the last must be
// `project`; interior projections are allowed and compile to the rank-one
// sandwich |s><s| (x) 1.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "zdistill/error.hpp"
#include "zdistill/linalg.hpp"

namespace zdistill {

enum class StepKind { Prepare, Interact, Free, Project };

inline const char* to_string(StepKind k) {
    switch (k) {
    case StepKind::Prepare: return "prepare";
    case StepKind::Interact: return "interact";
    case StepKind::Free: return "free";
    case StepKind::Project: return "project";
    }
    return "?";
}

struct ProtocolStep {
    StepKind kind = StepKind::Free;
    std::string mediator; ///< empty for Free
    std::string target;   ///< partner subsystem of an Interact
    std::string state;    ///< state label of Prepare/Project
    double duration = 0.0;
    std::size_t line = 0; ///< source line, 0 when built programmatically

    bool operator==(const ProtocolStep& o) const {
        return kind == o.kind && mediator == o.mediator && target == o.target && state == o.state &&
               duration == o.duration;
    }
};

class ProtocolProgram {
public:
    /// Validates the step list: non-empty, `prepare` first and only first,
    /// a final `project`, one consistent mediator label, durations >= 0.
    static ProtocolProgram from_steps(std::vector<ProtocolStep> steps) {
        if (steps.empty()) throw ParseError(0, "empty program");
        if (steps.front().kind != StepKind::Prepare) {
            throw ParseError(steps.front().line, "prepare must be the first step");
        }
        const std::string mediator = steps.front().mediator;
        if (mediator.empty()) throw ParseError(steps.front().line, "missing mediator label");
        for (std::size_t k = 0; k < steps.size(); ++k) {
            const auto& s = steps[k];
            if (k > 0 && s.kind == StepKind::Prepare) throw ParseError(s.line, "prepare not first");
            if (s.kind != StepKind::Free && s.mediator != mediator) {
                throw ParseError(s.line, "mediator label '" + s.mediator + "' differs from '" + mediator + "'");
            }
            if (s.kind == StepKind::Interact && (s.target.empty() || s.target == mediator)) {
                throw ParseError(s.line, "interact needs a partner subsystem distinct from the mediator");
            }
            if ((s.kind == StepKind::Interact || s.kind == StepKind::Free) &&
                (!std::isfinite(s.duration) || s.duration < 0.0)) {
                throw ParseError(s.line, "negative duration");
            }
        }
        if (steps.back().kind != StepKind::Project) {
            throw ParseError(steps.back().line, "missing final project");
        }
        ProtocolProgram p;
        p.steps_ = std::move(steps);
        p.mediator_ = mediator;
        return p;
    }

    const std::vector<ProtocolStep>& steps() const noexcept { return steps_; }
    const std::string& mediator() const noexcept { return mediator_; }
    std::size_t size() const noexcept { return steps_.size(); }

private:
    std::vector<ProtocolStep> steps_;
    std::string mediator_;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
        std::size_t j = i;
        while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
        if (j > i) out.push_back(s.substr(i, j - i));
        i = j;
    }
    return out;
}

inline double parse_duration(std::string_view tok, std::size_t line) {
    double value = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (!tok.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || !std::isfinite(value)) {
        throw ParseError(line, "invalid duration '" + std::string(tok) + "'");
    }
    if (value < 0.0) throw ParseError(line, "negative duration");
    return value;
}

} // namespace detail

inline ProtocolProgram parse_program(std::string_view text) {
    std::vector<ProtocolStep> steps;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const auto tok = detail::split_ws(line);
        if (tok.empty()) continue;

        auto expect = [&](std::size_t n, const char* usage) {
            if (tok.size() != n) throw ParseError(line_no, std::string("expected '") + usage + "'");
        };
        ProtocolStep s;
        s.line = line_no;
        if (tok[0] == "prepare") {
            expect(3, "prepare <mediator> <state>");
            s.kind = StepKind::Prepare;
            s.mediator = tok[1];
            s.state = tok[2];
        } else if (tok[0] == "interact") {
            expect(4, "interact <mediator> <subsystem> <duration>");
            s.kind = StepKind::Interact;
            s.mediator = tok[1];
            s.target = tok[2];
            s.duration = detail::parse_duration(tok[3], line_no);
        } else if (tok[0] == "free") {
            expect(2, "free <duration>");
            s.kind = StepKind::Free;
            s.duration = detail::parse_duration(tok[1], line_no);
        } else if (tok[0] == "project") {
            expect(3, "project <mediator> <state>");
            s.kind = StepKind::Project;
            s.mediator = tok[1];
            s.state = tok[2];
        } else {
            throw ParseError(line_no, "unknown keyword '" + std::string(tok[0]) + "'");
        }
        steps.push_back(std::move(s));
    }
    return ProtocolProgram::from_steps(std::move(steps));
}

/// Inverse of parse_program; durations are printed with round-trip precision.
inline std::string to_text(const ProtocolProgram& prog) {
    std::ostringstream os;
    char buf[64];
    for (const auto& s : prog.steps()) {
        switch (s.kind) {
        case StepKind::Prepare: os << "prepare " << s.mediator << ' ' << s.state; break;
        case StepKind::Project: os << "project " << s.mediator << ' ' << s.state; break;
        case StepKind::Interact:
            std::snprintf(buf, sizeof buf, "%.17g", s.duration);
            os << "interact " << s.mediator << ' ' << s.target << ' ' << buf;
            break;
        case StepKind::Free:
            std::snprintf(buf, sizeof buf, "%.17g", s.duration);
            os << "free " << buf;
            break;
        }
        os << '\n';
    }
    return os.str();
}

/// Fluent construction of programs in code.
class ProgramBuilder {
public:
    explicit ProgramBuilder(std::string mediator = "X") : mediator_(std::move(mediator)) {}

    ProgramBuilder& prepare(const std::string& state) { return push(StepKind::Prepare, "", state, 0.0); }
    ProgramBuilder& interact(const std::string& sys, double t) { return push(StepKind::Interact, sys, "", t); }
    ProgramBuilder& free(double t) { return push(StepKind::Free, "", "", t); }
    ProgramBuilder& project(const std::string& state) { return push(StepKind::Project, "", state, 0.0); }

    ProtocolProgram build() const { return ProtocolProgram::from_steps(steps_); }

private:
    ProgramBuilder& push(StepKind kind, const std::string& target, const std::string& state, double t) {
        ProtocolStep s;
        s.kind = kind;
        s.mediator = kind == StepKind::Free ? "" : mediator_;
        s.target = target;
        s.state = state;
        s.duration = t;
        steps_.push_back(std::move(s));
        return *this;
    }

    std::string mediator_;
    std::vector<ProtocolStep> steps_;
};

// ---------------------------------------------------------------------------
// Compilation

/// What a model supplies to the compiler. The full Hilbert space is
/// mediator (x) rest, with the mediator as the most significant factor:
/// full index = x * rest_dim + r.
struct ModelBinding {
    std::string mediator = "X";
    std::map<std::string, ComplexVector> mediator_states; ///< 2-component kets by label
    Index rest_dim = 0;
    HermitianOperator free_hamiltonian;                   ///< H_0 on the full space
    std::map<std::string, HermitianOperator> interactions; ///< H'_{X,sys} by partner label

    Index full_dim() const { return 2 * rest_dim; }

    void validate() const {
        if (rest_dim <= 0) throw CompileError("model binding: empty subsystem space");
        if (free_hamiltonian.dim() != full_dim()) throw CompileError("model binding: H0 has wrong dimension");
        for (const auto& [label, h] : interactions) {
            if (h.dim() != full_dim()) throw CompileError("model binding: interaction '" + label + "' has wrong dimension");
        }
        for (const auto& [label, s] : mediator_states) {
            if (s.size() != 2) throw CompileError("model binding: mediator state '" + label + "' is not two-dimensional");
        }
    }
};

/// Mediator ket |s> (x) 1_rest as a (2d x d) matrix.
inline ComplexMatrix embed_mediator_ket(const ComplexVector& s, Index rest_dim) {
    ComplexMatrix k = ComplexMatrix::Zero(2 * rest_dim, rest_dim);
    for (Index x = 0; x < 2; ++x) {
        k.block(x * rest_dim, 0, rest_dim, rest_dim) = s(x) * ComplexMatrix::Identity(rest_dim, rest_dim);
    }
    return k;
}

/// The effective operator of one protocol cycle on the non-mediator space.
struct CompiledCycle {
    ComplexMatrix matrix;
    ProtocolProgram source;

    CompiledCycle(ComplexMatrix m, ProtocolProgram src) : matrix(std::move(m)), source(std::move(src)) {
        require_square(matrix, "CompiledCycle");
        require_finite(matrix, "CompiledCycle");
        const double rho = spectral_radius(matrix);
        if (rho > 1.0 + 1e-9) {
            throw InvariantViolation("CompiledCycle: spectral radius " + std::to_string(rho) + " exceeds 1");
        }
    }

    Index dim() const { return matrix.rows(); }
};

using EffectiveOperator = CompiledCycle;

inline CompiledCycle compile_cycle(const ProtocolProgram& prog, const ModelBinding& model) {
    model.validate();
    if (prog.mediator() != model.mediator) {
        throw CompileError("unknown subsystem label '" + prog.mediator() + "' (mediator is '" + model.mediator + "')");
    }
    const Index d = model.rest_dim;

    auto state_of = [&](const ProtocolStep& s) -> const ComplexVector& {
        const auto it = model.mediator_states.find(s.state);
        if (it == model.mediator_states.end()) {
            throw CompileError("state label '" + s.state + "' is not in the basis of " + s.mediator);
        }
        return it->second;
    };

    std::map<std::pair<std::string, double>, ComplexMatrix> cache;
    auto propagator = [&](const std::string& partner, double t) -> const ComplexMatrix& {
        const auto key = std::make_pair(partner, t);
        if (auto it = cache.find(key); it != cache.end()) return it->second;
        ComplexMatrix u;
        if (partner.empty()) {
            u = hermitian_matexp(model.free_hamiltonian, t);
        } else {
            const auto it = model.interactions.find(partner);
            if (it == model.interactions.end()) throw CompileError("unknown subsystem label '" + partner + "'");
            u = hermitian_matexp(model.free_hamiltonian + it->second, t);
        }
        return cache.emplace(key, std::move(u)).first->second;
    };

    const auto& steps = prog.steps();
    ComplexMatrix k = embed_mediator_ket(state_of(steps.front()), d);
    for (std::size_t j = 1; j + 1 < steps.size(); ++j) {
        const auto& s = steps[j];
        switch (s.kind) {
        case StepKind::Interact: k = propagator(s.target, s.duration) * k; break;
        case StepKind::Free: k = propagator("", s.duration) * k; break;
        case StepKind::Project: {
            const ComplexMatrix e = embed_mediator_ket(state_of(s), d);
            k = e * (e.adjoint() * k);
            break;
        }
        case StepKind::Prepare: throw ParseError(s.line, "prepare not first");
        }
    }
    const ComplexMatrix bra = embed_mediator_ket(state_of(steps.back()), d).adjoint();
    return CompiledCycle(bra * k, prog);
}

} // namespace zdistill
