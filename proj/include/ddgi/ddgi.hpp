#pragma once

// Umbrella header.

#include "ddgi/bvh.hpp"
#include "ddgi/config.hpp"
#include "ddgi/geometry.hpp"
#include "ddgi/image_io.hpp"
#include "ddgi/math.hpp"
#include "ddgi/obj_loader.hpp"
#include "ddgi/parallel.hpp"
#include "ddgi/position_optimizer.hpp"
#include "ddgi/presets.hpp"
#include "ddgi/probe_query.hpp"
#include "ddgi/probe_states.hpp"
#include "ddgi/probe_update.hpp"
#include "ddgi/probe_volume.hpp"
#include "ddgi/reference.hpp"
#include "ddgi/renderer.hpp"
#include "ddgi/scene.hpp"
#include "ddgi/shading.hpp"
