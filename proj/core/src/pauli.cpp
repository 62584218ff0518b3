#include "cbs/pauli.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace cbs {

namespace {

constexpr double kMergeDropThreshold = 1e-14;

void check_n_qubits(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 63) {
        throw Error(ErrorKind::domain,
                    "n_qubits must be in [1, 63], got " + std::to_string(n_qubits));
    }
}

int parity(std::uint64_t bits) { return std::popcount(bits) & 1; }

cplx i_power(int k) {
    switch (k & 3) {
        case 0: return {1.0, 0.0};
        case 1: return {0.0, 1.0};
        case 2: return {-1.0, 0.0};
        default: return {0.0, -1.0};
    }
}

}  // namespace

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::parse: return "parse";
        case ErrorKind::dimension: return "dimension";
        case ErrorKind::domain: return "domain";
        case ErrorKind::convergence: return "convergence";
        case ErrorKind::infeasible: return "infeasible";
        case ErrorKind::degenerate_anchor: return "degenerate-anchor";
        case ErrorKind::ill_conditioned: return "ill-conditioned-factor";
        case ErrorKind::empty_support: return "empty-support";
        case ErrorKind::degenerate_variance: return "degenerate-variance";
        case ErrorKind::infinite_variance: return "infinite-variance";
        case ErrorKind::contract_violation: return "contract-violation";
        case ErrorKind::undefined_sd: return "undefined-sd";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

PauliString PauliString::identity(int n_qubits) {
    check_n_qubits(n_qubits);
    return PauliString{n_qubits, 0, 0};
}

PauliString PauliString::parse(int n_qubits, std::string_view text) {
    check_n_qubits(n_qubits);
    PauliString p{n_qubits, 0, 0};
    std::uint64_t seen = 0;
    std::istringstream in{std::string(text)};
    std::string token;
    while (in >> token) {
        const char letter = token[0];
        if (letter != 'X' && letter != 'Y' && letter != 'Z') {
            throw Error(ErrorKind::parse, "malformed Pauli token '" + token + "'");
        }
        const std::string digits = token.substr(1);
        if (digits.empty() ||
            !std::ranges::all_of(digits, [](unsigned char c) { return std::isdigit(c); })) {
            throw Error(ErrorKind::parse, "malformed Pauli token '" + token + "'");
        }
        unsigned long qubit = 0;
        try {
            qubit = std::stoul(digits);
        } catch (const std::out_of_range&) {
            throw Error(ErrorKind::parse, "qubit index out of range in token '" + token + "'");
        }
        if (qubit >= static_cast<unsigned long>(n_qubits)) {
            throw Error(ErrorKind::parse, "qubit index " + std::to_string(qubit) +
                                              " exceeds n_qubits=" + std::to_string(n_qubits));
        }
        const std::uint64_t bit = std::uint64_t{1} << qubit;
        if (seen & bit) {
            throw Error(ErrorKind::parse,
                        "duplicate qubit index " + std::to_string(qubit) + " in one string");
        }
        seen |= bit;
        if (letter == 'X' || letter == 'Y') p.x_mask |= bit;
        if (letter == 'Z' || letter == 'Y') p.z_mask |= bit;
    }
    return p;
}

std::string PauliString::str() const {
    std::string out;
    for (int s = 0; s < n_qubits; ++s) {
        const char c = letter(s);
        if (c == 'I') continue;
        if (!out.empty()) out += ' ';
        out += c;
        out += std::to_string(s);
    }
    return out;
}

char PauliString::letter(int qubit) const {
    const bool x = (x_mask >> qubit) & 1;
    const bool z = (z_mask >> qubit) & 1;
    if (x && z) return 'Y';
    if (x) return 'X';
    if (z) return 'Z';
    return 'I';
}

int PauliString::weight() const { return std::popcount(x_mask | z_mask); }

Observable::Observable(int n_qubits, std::vector<PauliTerm> terms) : n_qubits_(n_qubits) {
    check_n_qubits(n_qubits);
    std::map<std::pair<std::uint64_t, std::uint64_t>, std::size_t> index;
    terms_.reserve(terms.size());
    for (const auto& term : terms) {
        if (term.string.n_qubits != n_qubits) {
            throw Error(ErrorKind::dimension, "term qubit count " +
                                                  std::to_string(term.string.n_qubits) +
                                                  " does not match observable n_qubits=" +
                                                  std::to_string(n_qubits));
        }
        if (!std::isfinite(term.coeff)) {
            throw Error(ErrorKind::domain, "non-finite coefficient");
        }
        const auto key = std::make_pair(term.string.x_mask, term.string.z_mask);
        auto [it, inserted] = index.try_emplace(key, terms_.size());
        if (inserted) {
            terms_.push_back(term);
        } else {
            terms_[it->second].coeff += term.coeff;
        }
    }
    std::erase_if(terms_, [](const PauliTerm& t) {
        return std::abs(t.coeff) < kMergeDropThreshold;
    });
}

Observable parse_observable(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("n_qubits") || !doc.contains("terms")) {
        throw Error(ErrorKind::parse, "expected object with 'n_qubits' and 'terms'");
    }
    if (!doc["n_qubits"].is_number_integer() || doc["n_qubits"].get<std::int64_t>() < 1) {
        throw Error(ErrorKind::parse, "'n_qubits' must be a positive integer");
    }
    const int n = doc["n_qubits"].get<int>();
    if (!doc["terms"].is_array()) {
        throw Error(ErrorKind::parse, "'terms' must be an array");
    }
    std::vector<PauliTerm> terms;
    terms.reserve(doc["terms"].size());
    std::size_t idx = 0;
    for (const auto& item : doc["terms"]) {
        if (!item.is_object() || !item.contains("coeff") || !item.contains("pauli")) {
            throw Error(ErrorKind::parse,
                        "term " + std::to_string(idx) + ": expected {'coeff','pauli'}");
        }
        if (!item["coeff"].is_number()) {
            throw Error(ErrorKind::parse,
                        "term " + std::to_string(idx) + ": coefficient must be a real number");
        }
        if (!item["pauli"].is_string()) {
            throw Error(ErrorKind::parse,
                        "term " + std::to_string(idx) + ": 'pauli' must be a string");
        }
        try {
            terms.push_back(PauliTerm{item["coeff"].get<double>(),
                                      PauliString::parse(n, item["pauli"].get<std::string>())});
        } catch (const Error& e) {
            throw Error(ErrorKind::parse, "term " + std::to_string(idx) + ": " + e.what());
        }
        ++idx;
    }
    return Observable(n, std::move(terms));
}

Observable load_observable(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorKind::io, "cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_observable(buf.str());
}

std::string observable_to_json(const Observable& o) {
    nlohmann::json doc;
    doc["n_qubits"] = o.n_qubits();
    doc["terms"] = nlohmann::json::array();
    for (const auto& term : o.terms()) {
        doc["terms"].push_back({{"coeff", term.coeff}, {"pauli", term.string.str()}});
    }
    return doc.dump(1);
}

namespace {

void check_same_width(const PauliString& p, const PauliString& q) {
    if (p.n_qubits != q.n_qubits) {
        throw Error(ErrorKind::dimension, "Pauli strings act on different qubit counts");
    }
}

}  // namespace

bool qubit_wise_commutes(const PauliString& p, const PauliString& q) {
    check_same_width(p, q);
    const std::uint64_t both = (p.x_mask | p.z_mask) & (q.x_mask | q.z_mask);
    const std::uint64_t differ = (p.x_mask ^ q.x_mask) | (p.z_mask ^ q.z_mask);
    return (both & differ) == 0;
}

bool generally_commutes(const PauliString& p, const PauliString& q) {
    check_same_width(p, q);
    return (parity(p.x_mask & q.z_mask) ^ parity(p.z_mask & q.x_mask)) == 0;
}

cplx pauli_transition(basis_label m, const PauliString& p, basis_label n) {
    const basis_label dim = basis_label{1} << p.n_qubits;
    if (m >= dim || n >= dim) {
        throw Error(ErrorKind::domain, "basis label out of range");
    }
    if ((m ^ n) != p.x_mask) return {0.0, 0.0};
    cplx value = i_power(std::popcount(p.x_mask & p.z_mask));
    if (parity(n & p.z_mask)) value = -value;
    return value;
}

cplx observable_transition(basis_label m, const Observable& o, basis_label n) {
    const basis_label dim = basis_label{1} << o.n_qubits();
    if (m >= dim || n >= dim) {
        throw Error(ErrorKind::domain, "basis label out of range");
    }
    const basis_label flip = m ^ n;
    cplx sum{0.0, 0.0};
    for (const auto& term : o.terms()) {
        if (term.string.x_mask != flip) continue;
        cplx value = i_power(std::popcount(term.string.x_mask & term.string.z_mask));
        if (parity(n & term.string.z_mask)) value = -value;
        sum += term.coeff * value;
    }
    return sum;
}

void apply_observable(const Observable& o, std::span<const cplx> in, std::span<cplx> out) {
    const std::size_t dim = std::size_t{1} << o.n_qubits();
    if (in.size() != dim || out.size() != dim) {
        throw Error(ErrorKind::dimension, "amplitude vector size does not match 2^n_qubits");
    }
    for (const auto& term : o.terms()) {
        const std::uint64_t x = term.string.x_mask;
        const std::uint64_t z = term.string.z_mask;
        const cplx base = term.coeff * i_power(std::popcount(x & z));
        for (std::size_t n = 0; n < dim; ++n) {
            const cplx v = parity(n & z) ? -base : base;
            out[n ^ x] += v * in[n];
        }
    }
}

namespace {

Eigen::MatrixXcd dense_matrix(const Observable& o) {
    const std::size_t dim = std::size_t{1} << o.n_qubits();
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(dim, dim);
    for (const auto& term : o.terms()) {
        const std::uint64_t x = term.string.x_mask;
        const std::uint64_t z = term.string.z_mask;
        const cplx base = term.coeff * i_power(std::popcount(x & z));
        for (std::size_t n = 0; n < dim; ++n) {
            mat(n ^ x, n) += parity(n & z) ? -base : base;
        }
    }
    return mat;
}

}  // namespace

double operator_inf_norm(const Observable& o) {
    constexpr int kMaxQubits = 16;
    if (o.n_qubits() > kMaxQubits) {
        throw Error(ErrorKind::domain, "operator norm limited to " +
                                           std::to_string(kMaxQubits) + " qubits");
    }
    if (o.terms().empty()) return 0.0;

    if (o.n_qubits() <= 10) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(dense_matrix(o),
                                                               Eigen::EigenvaluesOnly);
        const auto& ev = solver.eigenvalues();
        return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    }

    const std::size_t dim = std::size_t{1} << o.n_qubits();
    std::vector<cplx> v(dim), w(dim), u(dim);
    std::mt19937_64 rng(0x5DEECE66Dull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double norm = 0.0;
    for (auto& a : v) {
        a = {gauss(rng), 0.0};
        norm += std::norm(a);
    }
    norm = std::sqrt(norm);
    for (auto& a : v) a /= norm;

    constexpr int kMaxIters = 20000;
    constexpr double kTol = 1e-8;
    double lambda_prev = 0.0;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        std::fill(w.begin(), w.end(), cplx{0.0, 0.0});
        apply_observable(o, v, w);
        std::fill(u.begin(), u.end(), cplx{0.0, 0.0});
        apply_observable(o, w, u);
        double lambda = 0.0;
        double unorm = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            lambda += std::real(std::conj(v[k]) * u[k]);
            unorm += std::norm(u[k]);
        }
        unorm = std::sqrt(unorm);
        if (unorm == 0.0) return 0.0;
        if (iter > 0 && std::abs(lambda - lambda_prev) <= kTol * std::max(1.0, lambda)) {
            return std::sqrt(std::max(0.0, lambda));
        }
        lambda_prev = lambda;
        for (std::size_t k = 0; k < dim; ++k) v[k] = u[k] / unorm;
    }
    const double last = std::sqrt(std::max(0.0, lambda_prev));
    throw ConvergenceError("operator norm power iteration stalled", last,
                           last * (1.0 + kTol));
}

}  // namespace cbs
