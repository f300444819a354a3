#pragma once

#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>

#include "json.hpp"

#include "snwit/matrix.hpp"
#include "snwit/rotations.hpp"
#include "snwit/states.hpp"
#include "snwit/symmetric_measurement.hpp"
#include "snwit/witness.hpp"

namespace snwit {

// Matrices travel as row-major nested arrays with [re, im] entry pairs.
// Doubles rely on the emitter's shortest round-trip formatting, so a
// serialize/parse cycle is bit exact.
inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (long i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (long j = 0; j < m.cols(); ++j) {
            row.push_back({m(i, j).real(), m(i, j).imag()});
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, long rows, long cols) {
    if (!j.is_array() || static_cast<long>(j.size()) != rows) {
        throw std::invalid_argument("matrix_from_json: expected " + std::to_string(rows) +
                                    " rows");
    }
    Matrix m(rows, cols);
    for (long i = 0; i < rows; ++i) {
        const auto& row = j.at(i);
        if (!row.is_array() || static_cast<long>(row.size()) != cols) {
            throw std::invalid_argument("matrix_from_json: row " + std::to_string(i) +
                                        " must have " + std::to_string(cols) + " entries");
        }
        for (long jj = 0; jj < cols; ++jj) {
            const auto& entry = row.at(jj);
            if (!entry.is_array() || entry.size() != 2) {
                throw std::invalid_argument("matrix_from_json: entries must be [re, im]");
            }
            m(i, jj) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
        }
    }
    return m;
}

inline nlohmann::json real_matrix_to_json(const RealMatrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (long i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (long j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline RealMatrix real_matrix_from_json(const nlohmann::json& j, long rows, long cols) {
    if (!j.is_array() || static_cast<long>(j.size()) != rows) {
        throw std::invalid_argument("real_matrix_from_json: expected " +
                                    std::to_string(rows) + " rows");
    }
    RealMatrix m(rows, cols);
    for (long i = 0; i < rows; ++i) {
        const auto& row = j.at(i);
        if (!row.is_array() || static_cast<long>(row.size()) != cols) {
            throw std::invalid_argument("real_matrix_from_json: bad row length");
        }
        for (long jj = 0; jj < cols; ++jj) {
            m(i, jj) = row.at(jj).get<double>();
        }
    }
    return m;
}

inline nlohmann::json povm_to_json(const SymmetricPovm& povm) {
    const auto& p = povm.params;
    nlohmann::json elements = nlohmann::json::array();
    for (int a = 0; a < p.N; ++a) {
        nlohmann::json group = nlohmann::json::array();
        for (int k = 0; k < p.M; ++k) {
            group.push_back(matrix_to_json(povm.element(a, k)));
        }
        elements.push_back(std::move(group));
    }
    return nlohmann::json{{"d", p.d}, {"N", p.N}, {"M", p.M},
                          {"x", p.x}, {"t", p.t}, {"elements", std::move(elements)}};
}

inline SymmetricPovm povm_from_json(const nlohmann::json& j) {
    SymmetricPovm povm;
    povm.params.d = j.at("d").get<int>();
    povm.params.N = j.at("N").get<int>();
    povm.params.M = j.at("M").get<int>();
    povm.params.x = j.at("x").get<double>();
    povm.params.t = j.at("t").get<double>();
    const auto& p = povm.params;
    if (p.d < 2 || p.N < 1 || p.M < 2) {
        throw std::invalid_argument("povm_from_json: invalid dimensions");
    }
    povm.params.informationally_complete =
        (static_cast<long>(p.N) * (p.M - 1) == static_cast<long>(p.d) * p.d - 1);
    const auto& elements = j.at("elements");
    if (!elements.is_array() || static_cast<int>(elements.size()) != p.N) {
        throw std::invalid_argument("povm_from_json: expected N element groups");
    }
    povm.elements.resize(p.N);
    for (int a = 0; a < p.N; ++a) {
        const auto& group = elements.at(a);
        if (!group.is_array() || static_cast<int>(group.size()) != p.M) {
            throw std::invalid_argument("povm_from_json: expected M elements per group");
        }
        povm.elements[a].reserve(p.M);
        for (int k = 0; k < p.M; ++k) {
            povm.elements[a].push_back(matrix_from_json(group.at(k), p.d, p.d));
        }
    }
    return povm;
}

inline nlohmann::json rotation_family_to_json(const RotationFamily& family) {
    nlohmann::json matrices = nlohmann::json::array();
    for (const auto& o : family.matrices) {
        matrices.push_back(real_matrix_to_json(o));
    }
    return nlohmann::json{{"N", family.N}, {"M", family.M},
                          {"matrices", std::move(matrices)}};
}

inline RotationFamily rotation_family_from_json(const nlohmann::json& j) {
    RotationFamily family;
    family.N = j.at("N").get<int>();
    family.M = j.at("M").get<int>();
    if (family.N < 1 || family.M < 1) {
        throw std::invalid_argument("rotation_family_from_json: invalid shape");
    }
    const auto& matrices = j.at("matrices");
    if (!matrices.is_array() || static_cast<int>(matrices.size()) != family.N) {
        throw std::invalid_argument("rotation_family_from_json: expected N matrices");
    }
    family.matrices.reserve(family.N);
    for (int a = 0; a < family.N; ++a) {
        family.matrices.push_back(real_matrix_from_json(matrices.at(a), family.M, family.M));
    }
    return family;
}

inline nlohmann::json witness_to_json(const WitnessOperator& w) {
    const auto& p = w.params;
    return nlohmann::json{{"d", p.d},
                          {"N", p.N},
                          {"M", p.M},
                          {"x", p.x},
                          {"k", w.k},
                          {"rotations", rotation_family_to_json(w.rotations)},
                          {"matrix", matrix_to_json(w.matrix)}};
}

inline WitnessOperator witness_from_json(const nlohmann::json& j) {
    WitnessOperator w;
    w.params.d = j.at("d").get<int>();
    w.params.N = j.at("N").get<int>();
    w.params.M = j.at("M").get<int>();
    w.params.x = j.at("x").get<double>();
    w.params.t = 0.0;
    w.k = j.at("k").get<int>();
    if (w.params.d < 2 || w.k < 1 || w.k > w.params.d) {
        throw std::invalid_argument("witness_from_json: invalid parameters");
    }
    w.params.informationally_complete =
        (static_cast<long>(w.params.N) * (w.params.M - 1) ==
         static_cast<long>(w.params.d) * w.params.d - 1);
    w.rotations = rotation_family_from_json(j.at("rotations"));
    const long dd = static_cast<long>(w.params.d) * w.params.d;
    w.matrix = matrix_from_json(j.at("matrix"), dd, dd);
    return w;
}

inline nlohmann::json state_to_json(const BipartiteState& rho) {
    return nlohmann::json{{"dA", rho.dA}, {"dB", rho.dB},
                          {"matrix", matrix_to_json(rho.matrix)}};
}

// Accepts either {"d": n} for square factors or explicit {"dA", "dB"}.
inline BipartiteState state_from_json(const nlohmann::json& j) {
    int dA = 0;
    int dB = 0;
    if (j.contains("d")) {
        dA = dB = j.at("d").get<int>();
    } else {
        dA = j.at("dA").get<int>();
        dB = j.at("dB").get<int>();
    }
    const long dim = static_cast<long>(dA) * dB;
    return BipartiteState(matrix_from_json(j.at("matrix"), dim, dim), dA, dB);
}

inline void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("write_json_file: cannot open " + path);
    }
    out << j.dump(2) << "\n";
    if (!out) {
        throw std::runtime_error("write_json_file: write failed for " + path);
    }
}

inline nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("read_json_file: cannot open " + path);
    }
    return nlohmann::json::parse(in);
}

}  // namespace snwit
