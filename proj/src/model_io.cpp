// Copyright (C) 2026 The gemb authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License

#include "gemb/model_io.hpp"

#include <fstream>
#include <sstream>

#include "gemb/error.hpp"
#include "gemb/io_util.hpp"

namespace gemb {

namespace {

constexpr char kModelMagic[4] = {'G', 'E', 'M', 'M'};
constexpr uint32_t kModelVersion = 1;

// Section type tags. New model kinds get new tags; readers reject tags
// they do not know so stale tools fail loudly instead of misparsing.
enum SectionType : uint32_t {
  kSectionPca = 1,
  kSectionGmm = 2,
  kSectionGemb = 3,
  kSectionItq = 4,
  kSectionLsh = 5,
};

void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  io::write_le<uint64_t>(out, static_cast<uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) io::write_le<double>(out, v(i));
}

Eigen::VectorXd read_vector(std::istream& in, const std::string& what) {
  const auto n = io::read_le<uint64_t>(in, what + " length");
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = io::read_le<double>(in, what);
  return v;
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  io::write_le<uint64_t>(out, static_cast<uint64_t>(m.rows()));
  io::write_le<uint64_t>(out, static_cast<uint64_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) io::write_le<double>(out, m(r, c));
}

Eigen::MatrixXd read_matrix(std::istream& in, const std::string& what) {
  const auto rows = io::read_le<uint64_t>(in, what + " rows");
  const auto cols = io::read_le<uint64_t>(in, what + " cols");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = io::read_le<double>(in, what);
  return m;
}

void write_pca(std::ostream& out, const PcaModel& model) {
  io::write_le<double>(out, model.gamma);
  io::write_le<uint64_t>(out, static_cast<uint64_t>(model.d_in));
  io::write_le<uint64_t>(out, static_cast<uint64_t>(model.d_out));
  write_vector(out, model.mean);
  write_vector(out, model.eigenvalues);
  write_matrix(out, model.projection);
}

PcaModel read_pca(std::istream& in) {
  PcaModel model;
  model.gamma = io::read_le<double>(in, "pca gamma");
  model.d_in = static_cast<Eigen::Index>(io::read_le<uint64_t>(in, "pca d_in"));
  model.d_out = static_cast<Eigen::Index>(io::read_le<uint64_t>(in, "pca d_out"));
  model.mean = read_vector(in, "pca mean");
  model.eigenvalues = read_vector(in, "pca eigenvalues");
  model.projection = read_matrix(in, "pca projection");
  if (model.mean.size() != model.d_in || model.projection.rows() != model.d_in ||
      model.projection.cols() != model.d_out)
    throw FormatError("inconsistent pca section dimensions");
  return model;
}

void write_gmm(std::ostream& out, const GmmModel& model) {
  io::write_le<uint32_t>(out, model.kind == CovarianceKind::kFull ? 0u : 1u);
  write_vector(out, model.weights);
  write_matrix(out, model.means);
  for (const Eigen::MatrixXd& cov : model.covariances) write_matrix(out, cov);
}

GmmModel read_gmm(std::istream& in) {
  GmmModel model;
  const auto kind = io::read_le<uint32_t>(in, "gmm covariance kind");
  if (kind > 1) throw FormatError("unknown gmm covariance kind " + std::to_string(kind));
  model.kind = kind == 0 ? CovarianceKind::kFull : CovarianceKind::kDiagonal;
  model.weights = read_vector(in, "gmm weights");
  model.means = read_matrix(in, "gmm means");
  const int n = static_cast<int>(model.weights.size());
  if (model.means.rows() != n) throw FormatError("gmm mean count does not match weight count");
  const Eigen::Index d = model.means.cols();
  model.covariances.reserve(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) {
    Eigen::MatrixXd cov = read_matrix(in, "gmm covariance");
    const bool full_shape = cov.rows() == d && cov.cols() == d;
    const bool diag_shape = cov.rows() == d && cov.cols() == 1;
    if (model.kind == CovarianceKind::kFull ? !full_shape : !diag_shape)
      throw FormatError("gmm covariance " + std::to_string(j) + " has the wrong shape");
    model.covariances.push_back(std::move(cov));
  }
  // Factorizations are derived state; rebuilding them also validates that
  // the stored covariances are positive definite.
  refresh_factorizations(model);
  return model;
}

void write_section(std::ostream& out, uint32_t type, const std::string& payload) {
  io::write_le<uint32_t>(out, type);
  io::write_le<uint64_t>(out, static_cast<uint64_t>(payload.size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
}

void check_consumed(std::istringstream& in, const std::string& what) {
  if (in.peek() != std::char_traits<char>::eof())
    throw FormatError(what + " section payload longer than its contents");
}

}  // namespace

void save_models(const std::string& path, const ModelFile& models) {
  if (!models.pca && !models.gmm && !models.gemb && !models.itq && !models.lsh)
    throw ConfigError("refusing to write a model container with no sections");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  io::write_magic(out, kModelMagic);
  io::write_le<uint32_t>(out, kModelVersion);

  const auto payload_of = [](auto&& writer) {
    std::ostringstream buf(std::ios::binary);
    writer(buf);
    return buf.str();
  };

  if (models.pca)
    write_section(out, kSectionPca, payload_of([&](std::ostream& s) { write_pca(s, *models.pca); }));
  if (models.gmm)
    write_section(out, kSectionGmm, payload_of([&](std::ostream& s) { write_gmm(s, *models.gmm); }));
  if (models.gemb)
    write_section(out, kSectionGemb, payload_of([&](std::ostream& s) {
                    io::write_le<double>(s, models.gemb->gamma);
                    io::write_le<double>(s, models.gemb->alpha);
                    write_pca(s, models.gemb->pca);
                    write_gmm(s, models.gemb->gmm);
                  }));
  if (models.itq)
    write_section(out, kSectionItq, payload_of([&](std::ostream& s) {
                    io::write_le<uint64_t>(s, static_cast<uint64_t>(models.itq->n_bits));
                    write_vector(s, models.itq->mean);
                    write_matrix(s, models.itq->pca_projection);
                    write_matrix(s, models.itq->rotation);
                  }));
  if (models.lsh)
    write_section(out, kSectionLsh, payload_of([&](std::ostream& s) {
                    io::write_le<uint64_t>(s, static_cast<uint64_t>(models.lsh->n_bits));
                    write_vector(s, models.lsh->mean);
                    write_matrix(s, models.lsh->hyperplanes);
                  }));
  if (!out) throw IoError("write failed for " + path);
}

ModelFile load_models(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  io::check_magic(in, kModelMagic, "GEMM model");
  io::check_version(in, kModelVersion, "model");

  ModelFile models;
  while (in.peek() != std::char_traits<char>::eof()) {
    const auto type = io::read_le<uint32_t>(in, "section type");
    const auto length = io::read_le<uint64_t>(in, "section length");
    std::string payload(static_cast<size_t>(length), '\0');
    in.read(payload.data(), static_cast<std::streamsize>(length));
    if (!in) throw FormatError("truncated section payload");
    std::istringstream section(payload, std::ios::binary);

    switch (type) {
      case kSectionPca:
        if (models.pca) throw FormatError("duplicate pca section");
        models.pca = read_pca(section);
        break;
      case kSectionGmm:
        if (models.gmm) throw FormatError("duplicate gmm section");
        models.gmm = read_gmm(section);
        break;
      case kSectionGemb: {
        if (models.gemb) throw FormatError("duplicate gemb section");
        GembModel gemb;
        gemb.gamma = io::read_le<double>(section, "gemb gamma");
        gemb.alpha = io::read_le<double>(section, "gemb alpha");
        gemb.pca = read_pca(section);
        gemb.gmm = read_gmm(section);
        models.gemb = std::move(gemb);
        break;
      }
      case kSectionItq: {
        if (models.itq) throw FormatError("duplicate itq section");
        ItqModel itq;
        itq.n_bits = static_cast<int>(io::read_le<uint64_t>(section, "itq n_bits"));
        itq.mean = read_vector(section, "itq mean");
        itq.pca_projection = read_matrix(section, "itq projection");
        itq.rotation = read_matrix(section, "itq rotation");
        if (itq.pca_projection.cols() != itq.n_bits || itq.rotation.rows() != itq.n_bits ||
            itq.rotation.cols() != itq.n_bits || itq.pca_projection.rows() != itq.mean.size())
          throw FormatError("inconsistent itq section dimensions");
        models.itq = std::move(itq);
        break;
      }
      case kSectionLsh: {
        if (models.lsh) throw FormatError("duplicate lsh section");
        LshModel lsh;
        lsh.n_bits = static_cast<int>(io::read_le<uint64_t>(section, "lsh n_bits"));
        lsh.mean = read_vector(section, "lsh mean");
        lsh.hyperplanes = read_matrix(section, "lsh hyperplanes");
        if (lsh.hyperplanes.cols() != lsh.n_bits || lsh.hyperplanes.rows() != lsh.mean.size())
          throw FormatError("inconsistent lsh section dimensions");
        models.lsh = std::move(lsh);
        break;
      }
      default:
        throw FormatError("unknown model section type " + std::to_string(type) +
                          "; written by a newer tool?");
    }
    check_consumed(section, "model");
  }
  return models;
}

}  // namespace gemb
