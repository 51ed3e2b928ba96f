#include "ddso/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ddso {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string regret_csv(const RegretTable& table) {
  std::string out = "problem,setting,method,n,rep,regret,n_regret\n";
  for (const RegretRow& row : table) {
    out += row.problem;
    out += ',';
    out += row.setting;
    out += ',';
    out += to_string(row.method);
    out += ',';
    out += std::to_string(row.n);
    out += ',';
    out += std::to_string(row.rep);
    out += ',';
    out += fmt17(row.regret);
    out += ',';
    out += fmt17(row.n_regret);
    out += '\n';
  }
  return out;
}

std::string summary_csv(const SummaryTable& summary, const std::vector<double>& c1) {
  std::ostringstream head;
  head << "method,n,mean,q25,q50,q75,m1,m2,m3";
  for (double t : c1) head << ",tail_" << t;
  std::string out = head.str() + "\n";
  for (const SummaryRow& row : summary) {
    out += to_string(row.method);
    out += ',';
    out += std::to_string(row.n);
    for (double v : {row.mean, row.q25, row.q50, row.q75, row.m1, row.m2, row.m3}) {
      out += ',';
      out += fmt17(v);
    }
    for (double t : row.tails) {
      out += ',';
      out += fmt17(t);
    }
    out += '\n';
  }
  return out;
}

namespace {

void append_matrix(std::string& out, const std::string& name, const Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) {
      out += name;
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += std::to_string(j);
      out += ',';
      out += fmt17(m(i, j));
      out += '\n';
    }
}

}  // namespace

std::string covmodel_csv(const CovModel& cov) {
  std::string out = "matrix,row,col,value\n";
  append_matrix(out, "h_omega", cov.h_omega);
  append_matrix(out, "h_bar", cov.h_bar);
  append_matrix(out, "h_theta", cov.h_theta);
  append_matrix(out, "sigma_grad", cov.sigma_grad);
  append_matrix(out, "fisher", cov.fisher);
  append_matrix(out, "jacobian", cov.jac);
  append_matrix(out, "active_rows", cov.a);
  append_matrix(out, "phi", cov.phi);
  append_matrix(out, "s_theta", cov.s_theta);
  return out;
}

std::string limitlaw_samples_csv(const std::vector<Method>& methods,
                                 const std::vector<std::vector<double>>& samples) {
  std::string out = "method,draw,value\n";
  for (std::size_t m = 0; m < methods.size(); ++m) {
    for (std::size_t i = 0; i < samples[m].size(); ++i) {
      out += to_string(methods[m]);
      out += ',';
      out += std::to_string(i);
      out += ',';
      out += fmt17(samples[m][i]);
      out += '\n';
    }
  }
  return out;
}

std::string misspec_csv(const MisspecLimits& limits) {
  std::string out = "theta_kl,theta_star,kappa_eto,kappa_ieo\n";
  out += fmt17(limits.theta_kl);
  out += ',';
  out += fmt17(limits.theta_star);
  out += ',';
  out += fmt17(limits.kappa_eto);
  out += ',';
  out += fmt17(limits.kappa_ieo);
  out += '\n';
  return out;
}

std::string limits_csv(const std::vector<LimitComparisonEntry>& entries) {
  std::string out = "method,ks_distance,empirical_mean,law_mean\n";
  for (const LimitComparisonEntry& e : entries) {
    out += to_string(e.method);
    out += ',';
    out += fmt17(e.ks_distance);
    out += ',';
    out += fmt17(e.empirical_mean);
    out += ',';
    out += fmt17(e.law_mean);
    out += '\n';
  }
  return out;
}

std::string sweep_csv(const std::vector<double>& gammas,
                      const std::vector<SummaryTable>& summaries) {
  if (gammas.size() != summaries.size())
    throw std::invalid_argument("sweep_csv: gamma/summary size mismatch");
  std::string out =
      "gamma,n,median_saa,median_eto,median_ieo,ordering_flag\n";
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    int n_max = 0;
    for (const SummaryRow& row : summaries[g]) n_max = std::max(n_max, row.n);
    double med_saa = 0.0, med_eto = 0.0, med_ieo = 0.0;
    for (const SummaryRow& row : summaries[g]) {
      if (row.n != n_max) continue;
      if (row.method == Method::SAA) med_saa = row.q50;
      if (row.method == Method::ETO) med_eto = row.q50;
      if (row.method == Method::IEO) med_ieo = row.q50;
    }
    const double gap = med_saa - med_eto;
    const int flag = gap > 0.0 ? 1 : (gap < 0.0 ? -1 : 0);
    out += fmt17(gammas[g]);
    out += ',';
    out += std::to_string(n_max);
    out += ',';
    out += fmt17(med_saa);
    out += ',';
    out += fmt17(med_eto);
    out += ',';
    out += fmt17(med_ieo);
    out += ',';
    out += std::to_string(flag);
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output file '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace ddso
