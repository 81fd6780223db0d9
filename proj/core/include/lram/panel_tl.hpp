#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lram/homogenize.hpp"
#include "lram/materials.hpp"

namespace lram {

// Homogenized panel between two air half-spaces, normal incidence along x.
// Top and bottom edges are periodic; depth is one metre.
struct PanelModel {
    EffectiveMaterial material;
    double thickness = 0.01;  // m
    double height = 0.0;      // m, 0 means equal to the thickness
    int nx = 4;
    int ny = 4;
    AirProperties air;

    double panel_height() const { return height > 0.0 ? height : thickness; }
};

// D(w) = K - i w C - w^2 M(w) on the full macro grid.
SpMatC assemble_macro(const PanelModel& panel, double omega);

struct ReflectionTransmission {
    Complex R;
    Complex T;
};

// Unit incident displacement amplitude from the left. Left-face x-DOFs move
// with 1 - R, right-face x-DOFs with T; air pressure enters through
// K_a = rho_a c_a w S.
ReflectionTransmission solve_rt(const PanelModel& panel, double omega);

struct TLSample {
    double f_hz = 0.0;
    Complex R;
    Complex T;
    double tl_db = 0.0;
    bool ok = true;
    std::string error;
};

struct TLResult {
    std::vector<TLSample> samples;
};

TLResult tl_sweep(const PanelModel& panel, const std::vector<double>& f_hz);

struct TLBand {
    double start_hz = 0.0;
    double end_hz = 0.0;
    double threshold_db = 40.0;
};

// First run of consecutive samples with TL above the threshold.
std::optional<TLBand> first_band_above(const TLResult& r, double threshold_db = 40.0);

double transmission_loss_db(Complex T);

std::string tl_csv(const TLResult& r);
std::string band_report(const std::optional<TLBand>& band, double threshold_db);

}  // namespace lram
