#pragma once

#include "fsi/fft.hpp"
#include "fsi/grid.hpp"
#include "fsi/io.hpp"
#include "fsi/patterns.hpp"
#include "fsi/pipeline.hpp"
#include "fsi/random.hpp"
#include "fsi/reconstruct.hpp"
#include "fsi/sampling.hpp"
#include "fsi/sensor.hpp"
