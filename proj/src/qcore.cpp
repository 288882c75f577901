#include "spinphoton/qcore.hpp"

#include <set>

namespace spinphoton {

Matrix partial_trace_raw(const Matrix& rho, const std::vector<int>& dims,
                         const std::vector<int>& keep) {
  int d_total = 1;
  for (int d : dims) d_total *= d;
  if (rho.rows() != d_total) throw ValidationError("partial_trace: dims do not match matrix");

  std::vector<bool> kept(dims.size(), false);
  for (int k : keep) kept.at(k) = true;

  int d_keep = 1, d_tr = 1;
  for (size_t i = 0; i < dims.size(); ++i) (kept[i] ? d_keep : d_tr) *= dims[i];

  // strides of each subsystem in the flat index (leftmost most significant)
  std::vector<int> stride(dims.size(), 1);
  for (int i = static_cast<int>(dims.size()) - 2; i >= 0; --i)
    stride[i] = stride[i + 1] * dims[i + 1];

  std::vector<int> keep_subs, tr_subs;
  for (size_t i = 0; i < dims.size(); ++i) (kept[i] ? keep_subs : tr_subs).push_back(static_cast<int>(i));

  // flat offsets for every combination of kept / traced indices
  auto offsets = [&](const std::vector<int>& subs) {
    int n = 1;
    for (int s : subs) n *= dims[s];
    std::vector<int> off(n, 0);
    for (int x = 0; x < n; ++x) {
      int rem = x;
      for (int si = static_cast<int>(subs.size()) - 1; si >= 0; --si) {
        int s = subs[si];
        off[x] += (rem % dims[s]) * stride[s];
        rem /= dims[s];
      }
    }
    return off;
  };
  std::vector<int> keep_off = offsets(keep_subs);
  std::vector<int> tr_off = offsets(tr_subs);

  Matrix out = Matrix::Zero(d_keep, d_keep);
  for (int i = 0; i < d_keep; ++i)
    for (int j = 0; j < d_keep; ++j) {
      cxd acc = 0.0;
      for (int t = 0; t < d_tr; ++t) acc += rho(keep_off[i] + tr_off[t], keep_off[j] + tr_off[t]);
      out(i, j) = acc;
    }
  return out;
}

Matrix embed_op(const Matrix& op, const std::vector<int>& dims, int pos) {
  Matrix out = Matrix::Identity(1, 1);
  for (size_t i = 0; i < dims.size(); ++i) {
    if (static_cast<int>(i) == pos)
      out = kron(out, op);
    else
      out = kron(out, Matrix::Identity(dims[i], dims[i]));
  }
  return out;
}

Matrix nearest_psd_unit_trace(const Matrix& herm) {
  Eigen::SelfAdjointEigenSolver<Matrix> es((herm + herm.adjoint()) / 2.0);
  Eigen::VectorXd ev = es.eigenvalues();
  int d = static_cast<int>(ev.size());
  // normalize trace first, then clip negatives redistributing the deficit
  ev.array() += (1.0 - ev.sum()) / d;
  std::vector<int> order(d);
  for (int i = 0; i < d; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return ev[a] < ev[b]; });
  double acc = 0.0;
  int remaining = d;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(d);
  for (int k = 0; k < d; ++k) {
    int i = order[k];
    double v = ev[i] + acc / remaining;
    if (v < 0.0) {
      acc += ev[i];
      --remaining;
    } else {
      for (int m = k; m < d; ++m) out[order[m]] = ev[order[m]] + acc / remaining;
      break;
    }
  }
  Matrix v = es.eigenvectors();
  return v * out.asDiagonal() * v.adjoint();
}

static Labels concat_labels(const Labels& a, const Labels& b) {
  std::set<std::string> names;
  for (const auto& l : a) names.insert(l.name);
  for (const auto& l : b)
    if (!names.insert(l.name).second) throw ValidationError("tensor: label collision: " + l.name);
  Labels out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

Ket tensor(const Ket& a, const Ket& b) {
  Labels labels = concat_labels(a.labels(), b.labels());
  Vector out(a.dim() * b.dim());
  for (int i = 0; i < a.dim(); ++i)
    out.segment(i * b.dim(), b.dim()) = a.amplitudes()(i) * b.amplitudes();
  return Ket(std::move(out), std::move(labels));
}

Operator tensor(const Operator& a, const Operator& b) {
  return Operator(kron(a.entries(), b.entries()), concat_labels(a.labels(), b.labels()));
}

DensityMatrix tensor(const DensityMatrix& a, const DensityMatrix& b) {
  return DensityMatrix(kron(a.entries(), b.entries()), concat_labels(a.labels(), b.labels()),
                       a.normalized() && b.normalized());
}

DensityMatrix partial_trace(const DensityMatrix& rho, const std::vector<std::string>& keep) {
  std::vector<int> keep_idx;
  for (const auto& name : keep) keep_idx.push_back(label_index(rho.labels(), name));
  std::sort(keep_idx.begin(), keep_idx.end());
  Labels out_labels;
  for (int k : keep_idx) out_labels.push_back(rho.labels()[k]);
  Matrix reduced = partial_trace_raw(rho.entries(), label_dims(rho.labels()), keep_idx);
  return DensityMatrix(std::move(reduced), std::move(out_labels), rho.normalized());
}

DensityMatrix propagate(const SuperOperator& g, double t_ns, const DensityMatrix& rho) {
  if (t_ns < 0) throw ValidationError("propagate: negative duration");
  if (g.dim() != rho.dim()) throw ValidationError("propagate: dimension mismatch");
  Matrix prop = expm(g.entries() * t_ns);
  Matrix out = unvectorize(prop * vectorize(rho.entries()), rho.dim());
  return DensityMatrix(std::move(out), rho.labels(), rho.normalized());
}

std::pair<DensityMatrix, double> measure_project(const DensityMatrix& rho,
                                                 const Operator& projector,
                                                 const std::string& subsystem) {
  if (!projector.is_projector())
    throw ValidationError("measure_project: operator is not an idempotent Hermitian projector");
  int pos = label_index(rho.labels(), subsystem);
  if (projector.dim() != rho.labels()[pos].dim)
    throw ValidationError("measure_project: projector dim does not match subsystem");
  Matrix full = embed_op(projector.entries(), label_dims(rho.labels()), pos);
  Matrix branch = full * rho.entries() * full;
  double prob = branch.trace().real();
  return {DensityMatrix(std::move(branch), rho.labels(), false), prob};
}

Matrix commutator_superop(const Matrix& h) {
  int d = static_cast<int>(h.rows());
  Matrix id = Matrix::Identity(d, d);
  return -ci * (kron(id, h) - kron(h.transpose(), id));
}

Matrix dissipator_superop(const Matrix& sigma) {
  int d = static_cast<int>(sigma.rows());
  Matrix id = Matrix::Identity(d, d);
  Matrix ss = sigma.adjoint() * sigma;
  return kron(sigma.conjugate(), sigma) - 0.5 * (kron(id, ss) + kron(ss.transpose(), id));
}

Matrix jump_superop(const Matrix& sigma) { return kron(sigma.conjugate(), sigma); }

Matrix liouvillian_superop(const Matrix& h, const std::vector<Matrix>& jumps,
                           const std::vector<double>& rates) {
  if (jumps.size() != rates.size()) throw ValidationError("liouvillian: jumps/rates mismatch");
  Matrix l = commutator_superop(h);
  for (size_t k = 0; k < jumps.size(); ++k) l += rates[k] * dissipator_superop(jumps[k]);
  return l;
}

Matrix unitary_superop(const Matrix& u) { return kron(u.conjugate(), u); }

Matrix apply_superop(const Matrix& s, const Matrix& rho) {
  int d = static_cast<int>(rho.rows());
  return unvectorize(s * vectorize(rho), d);
}

Matrix choi_matrix(const Matrix& s, int dim_in, int dim_out) {
  if (s.rows() != static_cast<Eigen::Index>(dim_out) * dim_out ||
      s.cols() != static_cast<Eigen::Index>(dim_in) * dim_in)
    throw ValidationError("choi_matrix: transfer matrix shape mismatch");
  Matrix choi = Matrix::Zero(dim_in * dim_out, dim_in * dim_out);
  for (int i = 0; i < dim_in; ++i)
    for (int j = 0; j < dim_in; ++j) {
      Matrix eij = Matrix::Zero(dim_in, dim_in);
      eij(i, j) = 1.0;
      Matrix out = unvectorize(s * vectorize(eij), dim_out);
      choi += kron(eij, out);
    }
  return choi;
}

}  // namespace spinphoton
