#include "tpslab/tpslab.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <iomanip>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "tpslab/experiment.hpp"
#include "tpslab/qubits.hpp"
#include "tpslab/version.hpp"

struct tpslab_state {
  tpslab::StateVector value;
};

struct tpslab_operator {
  tpslab::OperatorMatrix value;
};

struct tpslab_tps {
  tpslab::TensorProductStructure value;
};

namespace {

thread_local std::string last_error;

tpslab_status status_of(tpslab::ErrorKind kind) {
  using tpslab::ErrorKind;
  switch (kind) {
    case ErrorKind::InvalidArgument: return TPSLAB_ERR_INVALID_ARGUMENT;
    case ErrorKind::DimensionMismatch: return TPSLAB_ERR_DIMENSION_MISMATCH;
    case ErrorKind::NotHermitian: return TPSLAB_ERR_NOT_HERMITIAN;
    case ErrorKind::NotUnitary: return TPSLAB_ERR_NOT_UNITARY;
    case ErrorKind::NotOrthonormal: return TPSLAB_ERR_NOT_ORTHONORMAL;
    case ErrorKind::DegenerateLabels: return TPSLAB_ERR_DEGENERATE_LABELS;
    case ErrorKind::NonCommuting: return TPSLAB_ERR_NON_COMMUTING;
    case ErrorKind::GridIncompatible: return TPSLAB_ERR_GRID_INCOMPATIBLE;
    case ErrorKind::Config: return TPSLAB_ERR_CONFIG;
    case ErrorKind::NumericalGuard: return TPSLAB_ERR_NUMERICAL_GUARD;
    case ErrorKind::Io: return TPSLAB_ERR_IO;
  }
  return TPSLAB_ERR_INTERNAL;
}

template <class F>
tpslab_status guarded(F&& f) {
  last_error.clear();
  try {
    f();
    return TPSLAB_OK;
  } catch (const tpslab::Error& e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
  } catch (const std::exception& e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown failure";
  }
  return TPSLAB_ERR_INTERNAL;
}

void require(bool ok, const char* message) {
  if (!ok) throw tpslab::Error(tpslab::ErrorKind::InvalidArgument, message);
}

tpslab::Dims dims_from(const size_t* dims, size_t n) {
  require(dims != nullptr || n == 0, "dims is NULL");
  return tpslab::Dims(dims, dims + n);
}

tpslab::Bipartition cut_from(const size_t* left, size_t n_left) {
  require(left != nullptr || n_left == 0, "left is NULL");
  return tpslab::Bipartition{std::vector<std::size_t>(left, left + n_left)};
}

tpslab::Vector complex_vector(const double* data, size_t n) {
  tpslab::Vector v(static_cast<Eigen::Index>(n));
  for (size_t i = 0; i < n; ++i) v(static_cast<Eigen::Index>(i)) = {data[2 * i], data[2 * i + 1]};
  return v;
}

char* copy_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const tpslab::TensorProductStructure& tps_or_standard(const tpslab_tps* tps, const tpslab::Dims& dims,
                                                      std::optional<tpslab::TensorProductStructure>& storage) {
  if (tps) return tps->value;
  storage.emplace(tpslab::TensorProductStructure::standard(dims, "standard"));
  return *storage;
}

}  // namespace

extern "C" {

const char* tpslab_version(void) { return tpslab::kVersion; }

const char* tpslab_last_error(void) { return last_error.c_str(); }

const char* tpslab_status_name(tpslab_status status) {
  switch (status) {
    case TPSLAB_OK: return "ok";
    case TPSLAB_ERR_INVALID_ARGUMENT: return "invalid argument";
    case TPSLAB_ERR_DIMENSION_MISMATCH: return "dimension mismatch";
    case TPSLAB_ERR_NOT_HERMITIAN: return "not hermitian";
    case TPSLAB_ERR_NOT_UNITARY: return "not unitary";
    case TPSLAB_ERR_NOT_ORTHONORMAL: return "not orthonormal";
    case TPSLAB_ERR_DEGENERATE_LABELS: return "degenerate labels";
    case TPSLAB_ERR_NON_COMMUTING: return "non-commuting";
    case TPSLAB_ERR_GRID_INCOMPATIBLE: return "grid incompatible";
    case TPSLAB_ERR_CONFIG: return "config error";
    case TPSLAB_ERR_NUMERICAL_GUARD: return "numerical guard";
    case TPSLAB_ERR_IO: return "i/o error";
    case TPSLAB_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

tpslab_status tpslab_state_create(const double* amplitudes, size_t n_amplitudes, const size_t* dims, size_t n_dims,
                                  tpslab_state** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    require(amplitudes != nullptr, "amplitudes is NULL");
    *out = new tpslab_state{tpslab::StateVector(complex_vector(amplitudes, n_amplitudes), dims_from(dims, n_dims))};
  });
}

void tpslab_state_destroy(tpslab_state* state) { delete state; }

tpslab_status tpslab_operator_create(const double* entries, size_t dim, const size_t* dims, size_t n_dims,
                                     tpslab_operator** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    require(entries != nullptr, "entries is NULL");
    tpslab::Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (size_t r = 0; r < dim; ++r)
      for (size_t c = 0; c < dim; ++c) {
        const size_t k = 2 * (r * dim + c);
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = {entries[k], entries[k + 1]};
      }
    *out = new tpslab_operator{tpslab::OperatorMatrix(std::move(m), dims_from(dims, n_dims))};
  });
}

void tpslab_operator_destroy(tpslab_operator* op) { delete op; }

tpslab_status tpslab_tps_standard(const size_t* factor_dims, size_t n_factors, tpslab_tps** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = new tpslab_tps{tpslab::TensorProductStructure::standard(dims_from(factor_dims, n_factors), "standard")};
  });
}

tpslab_status tpslab_tps_from_basis(const double* basis, size_t dim, const size_t* factor_dims, size_t n_factors,
                                    tpslab_tps** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    require(basis != nullptr, "basis is NULL");
    const auto fd = dims_from(factor_dims, n_factors);
    std::vector<tpslab::StateVector> vectors;
    for (size_t k = 0; k < dim; ++k)
      vectors.emplace_back(tpslab::StateVector::normalized(complex_vector(basis + 2 * k * dim, dim), tpslab::Dims{dim}));
    *out = new tpslab_tps{tpslab::tps_from_basis(vectors, fd, "custom")};
  });
}

tpslab_status tpslab_tps_qubit_ab(tpslab_tps** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = new tpslab_tps{tpslab::qubits::ab_tps()};
  });
}

tpslab_status tpslab_tps_qubit_pq(tpslab_tps** out) {
  return guarded([&] {
    require(out != nullptr, "out is NULL");
    *out = new tpslab_tps{tpslab::qubits::pq_tps()};
  });
}

void tpslab_tps_destroy(tpslab_tps* tps) { delete tps; }

tpslab_status tpslab_schmidt_coefficients(const tpslab_state* state, const size_t* left, size_t n_left, double* out,
                                          size_t capacity, size_t* count) {
  return guarded([&] {
    require(state != nullptr, "state is NULL");
    require(out != nullptr || capacity == 0, "out is NULL");
    const auto sd = tpslab::schmidt_decompose(state->value, cut_from(left, n_left));
    const auto n = static_cast<size_t>(sd.coefficients.size());
    for (size_t i = 0; i < std::min(n, capacity); ++i) out[i] = sd.coefficients(static_cast<Eigen::Index>(i));
    if (count) *count = n;
  });
}

tpslab_status tpslab_entanglement_entropy(const tpslab_state* state, const tpslab_tps* tps, const size_t* left,
                                          size_t n_left, double* bits) {
  return guarded([&] {
    require(state != nullptr, "state is NULL");
    require(bits != nullptr, "bits is NULL");
    std::optional<tpslab::TensorProductStructure> storage;
    *bits = tpslab::entanglement_in_tps(state->value, tps_or_standard(tps, state->value.dims(), storage),
                                        cut_from(left, n_left));
  });
}

tpslab_status tpslab_is_local_unitary(const tpslab_operator* u, const tpslab_tps* tps, const size_t* left,
                                      size_t n_left, int* is_local, size_t* operator_rank, double* residual) {
  return guarded([&] {
    require(u != nullptr, "operator is NULL");
    std::optional<tpslab::TensorProductStructure> storage;
    const auto cert = tpslab::is_local_unitary(u->value, tps_or_standard(tps, u->value.dims(), storage),
                                               cut_from(left, n_left));
    if (is_local) *is_local = cert.local ? 1 : 0;
    if (operator_rank) *operator_rank = cert.operator_rank;
    if (residual) *residual = cert.residual;
  });
}

tpslab_status tpslab_is_sum_local(const tpslab_operator* h, const tpslab_tps* tps, const size_t* left, size_t n_left,
                                  int* is_split, double* residual) {
  return guarded([&] {
    require(h != nullptr, "operator is NULL");
    std::optional<tpslab::TensorProductStructure> storage;
    const auto cert =
        tpslab::is_sum_local(h->value, tps_or_standard(tps, h->value.dims(), storage), cut_from(left, n_left));
    if (is_split) *is_split = cert.split ? 1 : 0;
    if (residual) *residual = cert.residual;
  });
}

tpslab_status tpslab_validate_config(const char* path, size_t* n_diagnostics, char** report) {
  return guarded([&] {
    require(path != nullptr, "path is NULL");
    const auto parsed = tpslab::experiment::load_config(path);
    std::ostringstream os;
    for (const auto& d : parsed.diagnostics) os << (d.location.empty() ? "/" : d.location) << ": " << d.message << '\n';
    if (n_diagnostics) *n_diagnostics = parsed.diagnostics.size();
    if (report) *report = copy_string(os.str());
  });
}

tpslab_status tpslab_run_config(const char* path, const char* output_override, const char* format_override,
                                int* exit_code, char** report) {
  namespace ex = tpslab::experiment;
  return guarded([&] {
    require(path != nullptr, "path is NULL");
    std::optional<ex::OutputFormat> format;
    if (format_override) {
      const std::string f = format_override;
      if (f == "json")
        format = ex::OutputFormat::Json;
      else if (f == "csv")
        format = ex::OutputFormat::Csv;
      else
        throw tpslab::Error(tpslab::ErrorKind::InvalidArgument, "format must be json or csv");
    }
    const auto outcome =
        ex::run_file(path, output_override ? std::optional<std::string>(output_override) : std::nullopt, format);

    std::ostringstream os;
    for (const auto& d : outcome.diagnostics) os << (d.location.empty() ? "/" : d.location) << ": " << d.message << '\n';
    if (!outcome.message.empty()) os << "error: " << outcome.message << '\n';
    if (outcome.result) {
      for (const auto& c : outcome.result->checks)
        os << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(32) << c.name << ' ' << std::setprecision(6)
           << c.residual << (c.lower_bound ? " > " : " < ") << c.tolerance << (c.detail.empty() ? "" : "  (")
           << c.detail << (c.detail.empty() ? "" : ")") << '\n';
      for (const auto& w : outcome.result->warnings) os << "warning: " << w << '\n';
    }
    if (exit_code) *exit_code = outcome.exit_code;
    if (report) *report = copy_string(os.str());
  });
}

void tpslab_string_free(char* s) { std::free(s); }

}  // extern "C"
