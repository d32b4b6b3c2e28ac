#pragma once

#include "photocal/calibration.hpp"
#include "photocal/color.hpp"
#include "photocal/degradation.hpp"
#include "photocal/error.hpp"
#include "photocal/hdr.hpp"
#include "photocal/image.hpp"
#include "photocal/metrics.hpp"
#include "photocal/photometry.hpp"
#include "photocal/projection.hpp"
#include "photocal/synth.hpp"
