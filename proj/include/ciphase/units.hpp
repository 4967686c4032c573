#pragma once

// Conversions between the laboratory units used to state model parameters
// and atomic units. CODATA 2018 factors.

#include <stdexcept>
#include <string>
#include <string_view>

namespace ciphase {

namespace codata {
inline constexpr double hartree_per_wavenumber = 4.556335252912e-6;  // Eh per cm^-1
inline constexpr double electron_masses_per_amu = 1822.888486209;
inline constexpr double atomic_time_per_fs = 41.341373335;
}  // namespace codata

enum class Unit { wavenumber, hartree, amu, electron_mass, femtosecond, atomic_time, bohr };

inline std::string_view unit_name(Unit u) {
    switch (u) {
        case Unit::wavenumber: return "cm-1";
        case Unit::hartree: return "hartree";
        case Unit::amu: return "amu";
        case Unit::electron_mass: return "me";
        case Unit::femtosecond: return "fs";
        case Unit::atomic_time: return "au_time";
        case Unit::bohr: return "bohr";
    }
    return "?";
}

inline Unit parse_unit(std::string_view s) {
    for (Unit u : {Unit::wavenumber, Unit::hartree, Unit::amu, Unit::electron_mass,
                   Unit::femtosecond, Unit::atomic_time, Unit::bohr})
        if (unit_name(u) == s) return u;
    throw std::invalid_argument("unknown unit '" + std::string(s) + "'");
}

/// Converts `value` between units of the same dimension.
/// Throws std::invalid_argument for an unsupported pair.
inline double convert_units(double value, Unit from, Unit to) {
    if (from == to) return value;
    auto pair = [&](Unit a, Unit b) { return from == a && to == b; };
    if (pair(Unit::wavenumber, Unit::hartree)) return value * codata::hartree_per_wavenumber;
    if (pair(Unit::hartree, Unit::wavenumber)) return value / codata::hartree_per_wavenumber;
    if (pair(Unit::amu, Unit::electron_mass)) return value * codata::electron_masses_per_amu;
    if (pair(Unit::electron_mass, Unit::amu)) return value / codata::electron_masses_per_amu;
    if (pair(Unit::femtosecond, Unit::atomic_time)) return value * codata::atomic_time_per_fs;
    if (pair(Unit::atomic_time, Unit::femtosecond)) return value / codata::atomic_time_per_fs;
    throw std::invalid_argument("no conversion from " + std::string(unit_name(from)) + " to " +
                                std::string(unit_name(to)));
}

inline double fs_to_au(double t) { return convert_units(t, Unit::femtosecond, Unit::atomic_time); }
inline double au_to_fs(double t) { return convert_units(t, Unit::atomic_time, Unit::femtosecond); }

}  // namespace ciphase
