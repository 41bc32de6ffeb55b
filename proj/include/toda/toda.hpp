#pragma once

#include "toda/bolza.hpp"
#include "toda/coupled.hpp"
#include "toda/cover.hpp"
#include "toda/develop.hpp"
#include "toda/eigensolver.hpp"
#include "toda/errors.hpp"
#include "toda/gauss.hpp"
#include "toda/hyperbolic.hpp"
#include "toda/laplacian.hpp"
#include "toda/mesh.hpp"
#include "toda/mt_probe.hpp"
#include "toda/parallel.hpp"
#include "toda/poisson.hpp"
#include "toda/ricci.hpp"
#include "toda/sections.hpp"
#include "toda/spectral.hpp"
#include "toda/surface_group.hpp"
#include "toda/systole.hpp"
