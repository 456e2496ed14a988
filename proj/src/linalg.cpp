#include "knotlat/linalg.hpp"

#include <mutex>
#include <sstream>
#include <vector>

#include "knotlat/errors.hpp"

extern "C" {
void zgeev_(const char* jobvl, const char* jobvr, const int* n, std::complex<double>* a,
            const int* lda, std::complex<double>* w, std::complex<double>* vl, const int* ldvl,
            std::complex<double>* vr, const int* ldvr, std::complex<double>* work,
            const int* lwork, double* rwork, int* info);
void openblas_set_num_threads(int);
}

namespace knotlat {

namespace {

// The harness manages its own worker pool; BLAS must not oversubscribe,
// and single-threaded kernels keep results independent of worker count.
void pin_blas_threads() {
    static std::once_flag flag;
    std::call_once(flag, [] { openblas_set_num_threads(1); });
}

std::string fingerprint(const MatrixXcd& h) {
    std::ostringstream os;
    os << h.rows() << "x" << h.cols() << " |H|max=" << max_abs(h);
    return os.str();
}

EigResult zgeev_run(const MatrixXcd& h, bool with_vectors) {
    pin_blas_threads();
    const int n = static_cast<int>(h.rows());
    if (n == 0 || h.rows() != h.cols()) throw DimensionError("eig_dense: matrix must be square and non-empty");
    if (!h.allFinite()) throw SolverError("eig_dense: non-finite entries, " + fingerprint(h));

    MatrixXcd a = h; // zgeev destroys its input
    EigResult out;
    out.values.resize(n);
    MatrixXcd vr;
    if (with_vectors) vr.resize(n, n);

    const char jobvl = 'N';
    const char jobvr = with_vectors ? 'V' : 'N';
    int info = 0;
    int lwork = -1;
    cplx wkopt;
    std::vector<double> rwork(2 * n);
    zgeev_(&jobvl, &jobvr, &n, a.data(), &n, out.values.data(), nullptr, &n,
           with_vectors ? vr.data() : nullptr, &n, &wkopt, &lwork, rwork.data(), &info);
    lwork = static_cast<int>(wkopt.real());
    std::vector<cplx> work(lwork);
    zgeev_(&jobvl, &jobvr, &n, a.data(), &n, out.values.data(), nullptr, &n,
           with_vectors ? vr.data() : nullptr, &n, work.data(), &lwork, rwork.data(), &info);
    if (info != 0)
        throw SolverError("zgeev failed (info=" + std::to_string(info) + ") on " + fingerprint(h));
    if (with_vectors) out.vectors = std::move(vr);
    return out;
}

} // namespace

MatrixXcd pauli_x() {
    MatrixXcd m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

MatrixXcd pauli_y() {
    MatrixXcd m(2, 2);
    m << cplx(0, 0), cplx(0, -1), cplx(0, 1), cplx(0, 0);
    return m;
}

MatrixXcd pauli_z() {
    MatrixXcd m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

MatrixXcd id2() { return MatrixXcd::Identity(2, 2); }

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b) {
    MatrixXcd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

EigResult eig_dense(const MatrixXcd& h, bool with_vectors) { return zgeev_run(h, with_vectors); }

VectorXcd eig_values(const MatrixXcd& h) { return zgeev_run(h, false).values; }

cplx log_det(const MatrixXcd& m) {
    Eigen::PartialPivLU<MatrixXcd> lu(m);
    cplx acc(0.0, 0.0);
    const auto& u = lu.matrixLU();
    for (Eigen::Index i = 0; i < m.rows(); ++i) acc += std::log(u(i, i));
    int sign = lu.permutationP().determinant(); // +1 or -1
    if (sign < 0) acc += cplx(0.0, M_PI);
    return acc;
}

double max_abs(const MatrixXcd& m) {
    double v = 0.0;
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) v = std::max(v, std::abs(m(i, j)));
    return v;
}

} // namespace knotlat
