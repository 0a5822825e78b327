#include "qsd3/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "qsd3/errors.hpp"

namespace qsd3 {

SparseMatrix from_triplets(int rows, int cols, std::vector<Triplet> triplets) {
    if (rows <= 0 || cols <= 0)
        throw InvalidDimensionError("matrix dimensions must be positive");
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
        return a.r != b.r ? a.r < b.r : a.c < b.c;
    });
    SparseMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(static_cast<std::size_t>(rows) + 1, 0);
    for (std::size_t i = 0; i < triplets.size();) {
        const int r = triplets[i].r;
        const int c = triplets[i].c;
        cplx v{0.0, 0.0};
        while (i < triplets.size() && triplets[i].r == r && triplets[i].c == c)
            v += triplets[i++].v;
        if (v != cplx{0.0, 0.0}) {
            m.col.push_back(c);
            m.val.push_back(v);
            ++m.row_ptr[static_cast<std::size_t>(r) + 1];
        }
    }
    for (int r = 0; r < rows; ++r) m.row_ptr[r + 1] += m.row_ptr[r];
    return m;
}

SparseMatrix identity(int n) {
    std::vector<Triplet> t;
    t.reserve(n);
    for (int i = 0; i < n; ++i) t.push_back({i, i, cplx{1.0, 0.0}});
    return from_triplets(n, n, std::move(t));
}

SparseMatrix add(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw InvalidDimensionError("add: shape mismatch");
    SparseMatrix m;
    m.rows = a.rows;
    m.cols = a.cols;
    m.row_ptr.assign(static_cast<std::size_t>(a.rows) + 1, 0);
    for (int r = 0; r < a.rows; ++r) {
        std::int64_t ia = a.row_ptr[r], ib = b.row_ptr[r];
        const std::int64_t ea = a.row_ptr[r + 1], eb = b.row_ptr[r + 1];
        while (ia < ea || ib < eb) {
            int c;
            cplx v{0.0, 0.0};
            if (ib >= eb || (ia < ea && a.col[ia] <= b.col[ib])) {
                c = a.col[ia];
                v = a.val[ia++];
                if (ib < eb && b.col[ib] == c) v += b.val[ib++];
            } else {
                c = b.col[ib];
                v = b.val[ib++];
            }
            m.col.push_back(c);
            m.val.push_back(v);
        }
        m.row_ptr[r + 1] = static_cast<std::int64_t>(m.col.size());
    }
    return m;
}

SparseMatrix scale(const SparseMatrix& a, cplx factor) {
    SparseMatrix m = a;
    for (cplx& v : m.val) v *= factor;
    return m;
}

SparseMatrix matmul(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.cols != b.rows) throw InvalidDimensionError("matmul: shape mismatch");
    SparseMatrix m;
    m.rows = a.rows;
    m.cols = b.cols;
    m.row_ptr.assign(static_cast<std::size_t>(a.rows) + 1, 0);
    std::map<int, cplx> row; // sorted accumulator; rows here are short
    for (int r = 0; r < a.rows; ++r) {
        row.clear();
        for (std::int64_t ia = a.row_ptr[r]; ia < a.row_ptr[r + 1]; ++ia) {
            const int k = a.col[ia];
            const cplx av = a.val[ia];
            for (std::int64_t ib = b.row_ptr[k]; ib < b.row_ptr[k + 1]; ++ib)
                row[b.col[ib]] += av * b.val[ib];
        }
        for (const auto& [c, v] : row) {
            m.col.push_back(c);
            m.val.push_back(v);
        }
        m.row_ptr[r + 1] = static_cast<std::int64_t>(m.col.size());
    }
    return m;
}

SparseMatrix dagger(const SparseMatrix& a) {
    std::vector<Triplet> t;
    t.reserve(a.val.size());
    for (int r = 0; r < a.rows; ++r)
        for (std::int64_t i = a.row_ptr[r]; i < a.row_ptr[r + 1]; ++i)
            t.push_back({a.col[i], r, std::conj(a.val[i])});
    return from_triplets(a.cols, a.rows, std::move(t));
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
    SparseMatrix m;
    m.rows = a.rows * b.rows;
    m.cols = a.cols * b.cols;
    m.row_ptr.assign(static_cast<std::size_t>(m.rows) + 1, 0);
    m.col.reserve(static_cast<std::size_t>(a.nnz() * b.nnz()));
    m.val.reserve(static_cast<std::size_t>(a.nnz() * b.nnz()));
    for (int ra = 0; ra < a.rows; ++ra) {
        for (int rb = 0; rb < b.rows; ++rb) {
            const int r = ra * b.rows + rb;
            for (std::int64_t ia = a.row_ptr[ra]; ia < a.row_ptr[ra + 1]; ++ia) {
                for (std::int64_t ib = b.row_ptr[rb]; ib < b.row_ptr[rb + 1]; ++ib) {
                    m.col.push_back(a.col[ia] * b.cols + b.col[ib]);
                    m.val.push_back(a.val[ia] * b.val[ib]);
                }
            }
            m.row_ptr[r + 1] = static_cast<std::int64_t>(m.col.size());
        }
    }
    return m;
}

SparseMatrix kron3(const SparseMatrix& a, const SparseMatrix& b, const SparseMatrix& c) {
    return kron(kron(a, b), c);
}

double hermiticity_defect(const SparseMatrix& a) {
    if (!a.square()) throw InvalidDimensionError("hermiticity_defect: non-square");
    return max_abs_diff(a, dagger(a));
}

double max_abs_diff(const SparseMatrix& a, const SparseMatrix& b) {
    if (a.rows != b.rows || a.cols != b.cols)
        throw InvalidDimensionError("max_abs_diff: shape mismatch");
    double worst = 0.0;
    for (int r = 0; r < a.rows; ++r) {
        std::int64_t ia = a.row_ptr[r], ib = b.row_ptr[r];
        const std::int64_t ea = a.row_ptr[r + 1], eb = b.row_ptr[r + 1];
        while (ia < ea || ib < eb) {
            cplx va{0.0, 0.0}, vb{0.0, 0.0};
            if (ib >= eb || (ia < ea && a.col[ia] < b.col[ib])) {
                va = a.val[ia++];
            } else if (ia >= ea || b.col[ib] < a.col[ia]) {
                vb = b.val[ib++];
            } else {
                va = a.val[ia++];
                vb = b.val[ib++];
            }
            worst = std::max(worst, std::abs(va - vb));
        }
    }
    return worst;
}

} // namespace qsd3
