#pragma once

#include "phaseret/errors.hpp"

namespace phaseret::optics {

/// Physical description of the imaging geometry. All lengths in meters.
struct ImagingConfig {
  double wavelength = 1e-6;   // illumination wavelength
  double distance = 5e-5;     // object plane -> detector plane
  double pixel_pitch = 4e-6;  // meters per sample
  double i0 = 1.0;            // illumination intensity scale
  int height = 64;
  int width = 64;

  void validate() const {
    if (wavelength <= 0) throw ConfigError("ImagingConfig: wavelength must be > 0");
    if (pixel_pitch <= 0) throw ConfigError("ImagingConfig: pixel_pitch must be > 0");
    if (i0 <= 0) throw ConfigError("ImagingConfig: i0 must be > 0");
    if (height < 2 || width < 2) throw ConfigError("ImagingConfig: grid must be >= 2x2");
  }

  double wavenumber() const { return 6.283185307179586476925286766559 / wavelength; }
};

}  // namespace phaseret::optics
