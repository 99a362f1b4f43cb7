#pragma once

#include <array>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rda/solver.hpp"

namespace rda {

inline constexpr std::size_t kPsiTerms = 10;

struct PsiBreakdown {
    std::array<double, kPsiTerms> terms{};
    double total = 0.0;
};

struct EnergyRecord {
    double t = 0.0;
    double E = 0.0;
    double Psi = 0.0;
    std::array<double, kPsiTerms> terms{};
    std::map<double, double> tail;  // k -> tail energy
};

/// E = |v|^2 + lambda' |u|^2 + |grad u|^2 + 2 int F(u).
double energy_E(const StateUV& s, const DiscreteProblem& prob);

/// Production functional Psi with its ten summands, in order:
///  1 -2(alpha-delta-2 sigma)|v|^2      2 -2(delta-2 sigma) lambda' |u|^2
///  3 -2(delta-2 sigma)|grad u|^2       4 8 sigma int F
///  5 -2 delta int f(u) u               6 2 lambda' (u,h) w
///  7 2 (grad u, grad h) w              8 2 w int f(u) h
///  9 2 (g,v)                          10 2 (delta-alpha)(v,h) w
/// Along exact solutions dE/dt + 4 sigma E = Psi.
PsiBreakdown psi(const StateUV& s, double omega_t, const DiscreteProblem& prob);
PsiBreakdown psi(const StateUV& s, const NoiseSignal& noise, const DiscreteProblem& prob);

struct TailEnergy {
    double value = 0.0;
    bool truncated = false;
};

/// int rho(|x|^2/k^2) (|v|^2 + lambda'|u|^2 + |grad u|^2 + 2F(u)) dx.
TailEnergy tail_energy(const StateUV& s, double k, const DiscreteProblem& prob);

EnergyRecord record_energy(const StateUV& s, const NoiseSignal& noise, const DiscreteProblem& prob,
                           std::span<const double> tail_ks = {});

struct EnergyResiduals {
    /// (E_{i+1}-E_i)/dt + 4 sigma (E_i+E_{i+1})/2 - (Psi_i+Psi_{i+1})/2, one per interval.
    std::vector<double> differential;
    /// E(t_i) - e^{-4 sigma (t_i - t_0)} E(t_0) - int_{t_0}^{t_i} e^{4 sigma (xi - t_i)} Psi,
    /// trapezoidal; one per record (first is 0).
    std::vector<double> integral;

    double max_abs_differential() const;
    double max_abs_integral() const;
};

/// Records must be equally spaced in t.
EnergyResiduals energy_identity_residual(std::span<const EnergyRecord> records, double sigma);

/// Observer that appends an EnergyRecord per notification.
Observer energy_recorder(std::vector<EnergyRecord>& out, const NoiseSignal& noise,
                         const DiscreteProblem& prob, std::vector<double> tail_ks = {});

}  // namespace rda
