"""Whitted ray tracer with brute force, unsorted and sorted ray-hierarchy engines."""

from ._core import (
    ConfigLimitError,
    InvalidArgument,
    IoError,
    Scene,
    build_fixture,
    compress_sort_decompress,
    cone_grow,
    cone_sphere_test,
    cone_union,
    exclusive_scan,
    hash_shadow_ray,
    inclusive_scan,
    load_scene,
    minimal_enclosing_sphere,
    pack_hit,
    radix_sort_pairs,
    ray_triangle_intersect,
    render,
    run_cli,
    sphere_union,
    trim_compact,
    unpack_hit,
    write_fixtures,
)

__all__ = [
    "ConfigLimitError",
    "InvalidArgument",
    "IoError",
    "Scene",
    "build_fixture",
    "compress_sort_decompress",
    "cone_grow",
    "cone_sphere_test",
    "cone_union",
    "exclusive_scan",
    "hash_shadow_ray",
    "inclusive_scan",
    "load_scene",
    "minimal_enclosing_sphere",
    "pack_hit",
    "radix_sort_pairs",
    "ray_triangle_intersect",
    "render",
    "run_cli",
    "sphere_union",
    "trim_compact",
    "unpack_hit",
    "write_fixtures",
]
