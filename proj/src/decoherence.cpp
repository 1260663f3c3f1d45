#include "rydgate/decoherence.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <stdexcept>

#include "rydgate/quadrature.hpp"

namespace rydgate {

namespace {

constexpr int kR = 2;
constexpr int kRydbergPair = kWorkingLevels * kR + kR;

enum class Pairing { same, cross };

bool in_class(int level_prime, int level, Pairing pairing) {
  const bool same = (level_prime == kR) == (level == kR);
  return pairing == Pairing::same ? same : !same;
}

// Working index with the active atom's level `x` and the partner's level `o`.
int working_index(Atom active, int x, int o) {
  return active == Atom::A ? kWorkingLevels * x + o : kWorkingLevels * o + x;
}

int pair_for(Atom active, int active_level, int partner_level) {
  return active == Atom::A ? pair_index(active_level, partner_level) : pair_index(partner_level, active_level);
}

void check_stage(const StageSamples& stage) {
  const auto count = stage.rho.size();
  if (count < 3 || count % 2 == 0 || stage.times.size() != count)
    throw std::invalid_argument("stage needs an odd number (>= 3) of trajectory samples");
  if (!(stage.duration > 0.0)) throw std::invalid_argument("stage duration must be positive");
}

// The doubly excited pair state is blockaded and never feeds a rate term. Masking it is a
// projection, so the channels keep their Lindblad structure and their per-atom trace.
std::vector<WorkingMatrix> masked_samples(const StageSamples& stage) {
  std::vector<WorkingMatrix> out = stage.rho;
  for (auto& rho : out) {
    rho.row(kRydbergPair).setZero();
    rho.col(kRydbergPair).setZero();
  }
  return out;
}

// Per-sample quadrature contributions of the rate terms over one stage.
class StageSampler {
 public:
  StageSampler(const StageSamples& stage, std::vector<WorkingMatrix> samples)
      : stage_(stage), samples_(std::move(samples)) {}

  int size() const { return static_cast<int>(samples_.size()); }

  cplx weight(double frequency, int k) {
    auto it = weights_.find(frequency);
    if (it == weights_.end())
      it = weights_.emplace(frequency, oscillatory_weights(frequency, stage_.start, stage_.duration / (size() - 1), size()))
               .first;
    return it->second[k];
  }

  // -1/2 {Gamma(t), rho(t)} restricted to one class of level pairs, times its weight.
  PairMatrix loss(int k, const LossModel& model, Pairing pairing) {
    const LevelMatrix gamma = model.loss_matrix();
    const auto& nu = model.input_frequency;
    const Atom active = stage_.active;
    const WorkingMatrix& rho = samples_[k];
    WorkingMatrix out = WorkingMatrix::Zero();
    for (int x = 0; x < kWorkingLevels; ++x)
      for (int g = 0; g < kWorkingLevels; ++g) {
        if (!in_class(x, g, pairing) || gamma(x, g) == 0.0) continue;
        // Gamma(t)_{xg} = Gamma_{xg} exp(i (nu_x - nu_g) t)
        const cplx factor = 0.5 * gamma(x, g) * weight(nu[x] - nu[g], k);
        for (int o = 0; o < kWorkingLevels; ++o)
          for (int col = 0; col < kWorkingDim; ++col) {
            out(working_index(active, x, o), col) -= factor * rho(working_index(active, g, o), col);
            out(col, working_index(active, g, o)) -= factor * rho(col, working_index(active, x, o));
          }
      }
    return embed_working(out);
  }

  // Income into ground sublevels of the active atom from one class of level pairs, times its weight.
  PairMatrix income(int k, const LossModel& model, Pairing pairing) {
    PairMatrix out = PairMatrix::Zero(kPairDim, kPairDim);
    const auto& nu = model.input_frequency;
    const auto& omega = model.output_frequency;
    const Atom active = stage_.active;
    const WorkingMatrix& rho = samples_[k];
    for (int lp = 0; lp < kWorkingLevels; ++lp)
      for (int l = 0; l < kWorkingLevels; ++l) {
        if (!in_class(lp, l, pairing)) continue;
        for (int mp = 0; mp < kGroundDim; ++mp)
          for (int m = 0; m < kGroundDim; ++m) {
            const cplx coefficient = model.income(mp, m, lp, l);
            if (coefficient == 0.0) continue;
            const double phase_rate = (omega[mp] - omega[m]) - (nu[lp] - nu[l]);
            const cplx factor = coefficient * weight(phase_rate, k);
            for (int op = 0; op < kWorkingLevels; ++op)
              for (int o = 0; o < kWorkingLevels; ++o)
                out(pair_for(active, mp, kWorkingToAtom[op]), pair_for(active, m, kWorkingToAtom[o])) +=
                    factor * rho(working_index(active, lp, op), working_index(active, l, o));
          }
      }
    return out;
  }

 private:
  const StageSamples& stage_;
  std::vector<WorkingMatrix> samples_;
  std::map<double, std::vector<cplx>> weights_;
};

void check_transport(const StageSamples& stage, const std::vector<PairOperator>* transport) {
  if (transport && transport->size() != stage.rho.size())
    throw std::invalid_argument("transport does not match the trajectory samples");
}

template <class Term>
PairMatrix accumulate(int count, const std::vector<PairOperator>* transport, Term&& term) {
  PairMatrix sum = PairMatrix::Zero(kPairDim, kPairDim);
  for (int k = 0; k < count; ++k) {
    const PairMatrix piece = term(k);
    if (transport) {
      const PairOperator& u = (*transport)[k];
      const PairMatrix left = u * piece;
      sum += (u * left.adjoint()).adjoint();
    } else {
      sum += piece;
    }
  }
  return sum;
}

AtomMatrix embed_atom(const LevelMatrix& working, const std::array<double, kGroundDim>& phases) {
  AtomMatrix out = AtomMatrix::Zero();
  for (int m = 0; m < kGroundDim; ++m) out(m, m) = std::exp(cplx(0.0, -phases[m]));
  for (int i = 0; i < kWorkingLevels; ++i)
    for (int j = 0; j < kWorkingLevels; ++j) out(kWorkingToAtom[i], kWorkingToAtom[j]) = working(i, j);
  return out;
}

// Sum over control levels c of |c><c| (x) target_ops[c], each scaled by control(c, c),
// or the full product control (x) target when `product` is set.
PairOperator pair_operator(const AtomMatrix& control, const std::array<AtomMatrix, 2>& target, bool product) {
  std::vector<Eigen::Triplet<cplx>> entries;
  for (int i = 0; i < kAtomDim; ++i)
    for (int j = 0; j < kAtomDim; ++j) {
      if (control(i, j) == 0.0) continue;
      const AtomMatrix& t = product ? target[0] : target[i == kIndexR ? 1 : 0];
      for (int p = 0; p < kAtomDim; ++p)
        for (int q = 0; q < kAtomDim; ++q)
          if (t(p, q) != 0.0) entries.emplace_back(pair_index(i, p), pair_index(j, q), control(i, j) * t(p, q));
    }
  PairOperator out(kPairDim, kPairDim);
  out.setFromTriplets(entries.begin(), entries.end());
  return out;
}

}  // namespace

LevelMatrix LossModel::loss_matrix() const {
  Eigen::Matrix<double, kIntermediateDim, kIntermediateDim> completeness =
      Eigen::Matrix<double, kIntermediateDim, kIntermediateDim>::Zero();
  for (const auto& jump : jumps) completeness += jump.transpose() * jump;
  return gamma * amplitudes.adjoint() * completeness.cast<cplx>() * amplitudes;
}

cplx LossModel::income(int m_prime, int m, int level_prime, int level) const {
  cplx sum = 0.0;
  for (const auto& jump : jumps) {
    const cplx out_prime = jump.row(m_prime).cast<cplx>() * amplitudes.col(level_prime);
    const cplx out = jump.row(m).cast<cplx>() * amplitudes.col(level);
    sum += out_prime * std::conj(out);
  }
  return gamma * sum;
}

LossModel make_loss_model(const LevelScheme& scheme, const DrivePair& drive, bool dressed_outputs) {
  LossModel model;
  model.gamma = scheme.species().gamma;
  model.rydberg_decay_rate = scheme.species().rydberg_decay_rate;
  const auto amp = scattering_amplitudes(scheme, drive);
  for (int level = 0; level < kWorkingLevels; ++level) model.amplitudes.col(level) = amp.col(kWorkingToAtom[level]);
  for (int q = -1; q <= 1; ++q) model.jumps[q + 1] = scheme.jump(q);
  model.dressed_outputs = dressed_outputs;
  for (int m = 0; m < kGroundDim; ++m) {
    model.output_frequency[m] = scheme.ground_energy(m);
    model.output_shift[m] = light_shift(scheme.ground()[m], drive, scheme);
  }
  // r is held in the frame of b by the two-photon resonance.
  model.input_frequency = {scheme.ground_energy(kIndexA), scheme.ground_energy(kIndexB),
                           scheme.ground_energy(kIndexB)};
  return model;
}

RamanRates raman_rates(const LossModel& model) {
  const int a = 0, b = 1;
  return {std::real(model.income(kIndexB, kIndexB, a, a)), std::real(model.income(kIndexA, kIndexA, b, b))};
}

PairMatrix depopulation_increment(const StageSamples& stage, const LossModel& model,
                                  const std::vector<PairOperator>* transport) {
  check_stage(stage);
  check_transport(stage, transport);
  StageSampler sampler(stage, masked_samples(stage));
  return accumulate(sampler.size(), transport, [&](int k) { return sampler.loss(k, model, Pairing::same); });
}

PairMatrix optical_pumping_increment(const StageSamples& stage, const LossModel& model,
                                     const std::vector<PairOperator>* transport) {
  check_stage(stage);
  check_transport(stage, transport);
  StageSampler sampler(stage, masked_samples(stage));
  return accumulate(sampler.size(), transport, [&](int k) { return sampler.income(k, model, Pairing::same); });
}

CptIncrements cpt_increments(const StageSamples& stage, const LossModel& model,
                             const std::vector<PairOperator>* transport) {
  check_stage(stage);
  check_transport(stage, transport);
  StageSampler sampler(stage, masked_samples(stage));
  return {accumulate(sampler.size(), transport, [&](int k) { return sampler.loss(k, model, Pairing::cross); }),
          accumulate(sampler.size(), transport, [&](int k) { return sampler.income(k, model, Pairing::cross); })};
}

ProtocolTransport make_transport(const ProtocolSpec& spec, const LossModel& model) {
  spec.validate();
  const int n = spec.samples_per_stage;
  const double tau = spec.tau_pi;
  const MotionalSample rest{};
  std::array<double, kGroundDim> no_phase{};
  const auto pulse = [&](double duration, double blockade) {
    std::array<double, kGroundDim> phases{};
    if (model.dressed_outputs)
      for (int m = 0; m < kGroundDim; ++m) phases[m] = model.output_shift[m] * duration;
    return embed_atom(pulse_propagator(spec.drive, rest, duration, blockade), phases);
  };
  const auto idle = [&](double duration) { return embed_atom(idle_propagator(spec.drive, rest, duration), no_phase); };

  std::array<std::vector<PairOperator>, 3> within;
  for (int k = 0; k < n; ++k) {
    const double outer = tau * (n - 1 - k) / (n - 1);  // time left in a pi stage
    const double inner = 2.0 * outer;                   // time left in the 2pi stage
    within[0].push_back(pair_operator(pulse(outer, 0.0), {idle(outer), idle(outer)}, true));
    within[1].push_back(pair_operator(idle(inner), {pulse(inner, 0.0), pulse(inner, spec.blockade_shift)}, false));
  }
  within[2] = within[0];

  ProtocolTransport out;
  out.to_end[2] = within[2];
  const PairOperator after_second = within[2].front();
  const PairOperator after_first = after_second * within[1].front();
  for (int k = 0; k < n; ++k) {
    out.to_end[1].push_back(after_second * within[1][k]);
    out.to_end[0].push_back(after_first * within[0][k]);
  }
  return out;
}

double rydberg_decay_probability(const ProtocolTrajectory& trajectory, double rate) {
  if (rate == 0.0) return 0.0;
  double integral = 0.0;
  for (const auto& stage : trajectory.stages) {
    check_stage(stage);
    const int count = static_cast<int>(stage.rho.size());
    const auto w = oscillatory_weights(0.0, stage.start, stage.duration / (count - 1), count);
    for (int k = 0; k < count; ++k) {
      double population = 0.0;
      for (int o = 0; o < kWorkingLevels; ++o) {
        population += std::real(stage.rho[k](working_index(Atom::A, kR, o), working_index(Atom::A, kR, o)));
        population += std::real(stage.rho[k](working_index(Atom::B, kR, o), working_index(Atom::B, kR, o)));
      }
      integral += std::real(w[k]) * population;
    }
  }
  return rate * integral;
}

PairMatrix rydberg_decay_admixture(const PairMatrix& rho, double probability) {
  if (probability < 0.0) throw std::invalid_argument("decay probability must be non-negative");
  if (probability >= 0.5) throw std::domain_error("Rydberg decay probability too large for the first-order ledger");
  if (probability == 0.0) return rho;
  const cplx trace = rho.trace();
  PairMatrix out = (1.0 - probability) * rho;
  constexpr int ground_pairs = kGroundDim * kGroundDim;
  for (int i = 0; i < kGroundDim; ++i)
    for (int j = 0; j < kGroundDim; ++j) out(pair_index(i, j), pair_index(i, j)) += probability * trace / double(ground_pairs);
  return out;
}

AtomMatrix partial_trace(const PairMatrix& rho, Atom traced) {
  AtomMatrix out = AtomMatrix::Zero();
  for (int i = 0; i < kAtomDim; ++i)
    for (int j = 0; j < kAtomDim; ++j)
      for (int k = 0; k < kAtomDim; ++k)
        out(i, j) += traced == Atom::A ? rho(pair_index(k, i), pair_index(k, j)) : rho(pair_index(i, k), pair_index(j, k));
  return out;
}

IncrementLedger compute_increments(const ProtocolTrajectory& trajectory, const LossModel& model,
                                   const ChannelToggles& channels, const ProtocolTransport* transport) {
  IncrementLedger ledger;
  for (int s = 0; s < 3; ++s) {
    const auto& stage = trajectory.stages[s];
    const auto* carry = transport ? &transport->to_end[s] : nullptr;
    if (channels.depopulation) ledger.depopulation += depopulation_increment(stage, model, carry);
    if (channels.optical_pumping) ledger.optical_pumping += optical_pumping_increment(stage, model, carry);
    if (channels.cpt) {
      auto cpt = cpt_increments(stage, model, carry);
      ledger.cpt_leak += cpt.leak;
      ledger.cpt_repopulation += cpt.repopulation;
    }
  }
  if (channels.rydberg_decay) ledger.rydberg_probability = rydberg_decay_probability(trajectory, model.rydberg_decay_rate);
  return ledger;
}

LedgerResult apply_loss_ledger(const ProtocolSpec& spec, const ProtocolTrajectory& trajectory, const LossModel& model,
                               const ChannelToggles& channels, double eigenvalue_floor) {
  LedgerResult result;
  const auto transport = make_transport(spec, model);
  result.ledger = compute_increments(trajectory, model, channels, &transport);
  const PairMatrix coherent = trajectory.final_pair_state() + result.ledger.total();
  PairMatrix rho = rydberg_decay_admixture(coherent, result.ledger.rydberg_probability);
  result.ledger.rydberg_decay = rho - coherent;
  rho = 0.5 * (rho + rho.adjoint()).eval();

  Eigen::SelfAdjointEigenSolver<PairMatrix> solver(rho);
  result.min_eigenvalue = solver.eigenvalues().minCoeff();
  if (result.min_eigenvalue < -eigenvalue_floor) {
    std::clog << "rydgate: first-order ledger left eigenvalue " << result.min_eigenvalue
              << "; clamping to the positive cone\n";
    const double trace = std::real(rho.trace());
    Eigen::VectorXd values = solver.eigenvalues().cwiseMax(0.0);
    rho = solver.eigenvectors() * values.cast<cplx>().asDiagonal() * solver.eigenvectors().adjoint();
    rho *= trace / std::real(rho.trace());
    result.clamped = true;
  }
  result.rho = rho;
  return result;
}

}  // namespace rydgate
