#pragma once

#include "fracstab/numerics.hpp"
#include "fracstab/geometry.hpp"
#include "fracstab/parallel.hpp"
#include "fracstab/stability.hpp"
#include "fracstab/dynamics.hpp"
#include "fracstab/mandelbrot.hpp"
#include "fracstab/io.hpp"
