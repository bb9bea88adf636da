"""Mesh file readers and writers.

Input: Wavefront OBJ (text) and binary STL. Output and round-trip input:
binary little-endian PLY with per-vertex uchar RGB. Units are meters,
Z-up; no unit conversion is applied. Parse failures raise
:class:`MeshFormatError` carrying a line number (OBJ, PLY header) or byte
offset (STL, PLY body).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import InvalidInput, MeshFormatError
from .mesh import TriMesh


def load_mesh(path) -> TriMesh:
    """Dispatch on file extension (.obj, .stl, .ply)."""
    p = Path(path)
    ext = p.suffix.lower()
    if ext == ".obj":
        return load_obj(p)
    if ext == ".stl":
        return load_stl(p)
    if ext == ".ply":
        return load_ply(p)
    raise InvalidInput(f"unsupported mesh extension {ext!r} for {p}")


def load_obj(path) -> TriMesh:
    """Read vertices and faces from a Wavefront OBJ file.

    Polygon faces are fan-triangulated. Texture/normal references in face
    tokens are ignored; negative indices are resolved OBJ-style.
    """
    path = Path(path)
    vertices: list[list[float]] = []
    triangles: list[list[int]] = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            tag = tokens[0]
            if tag == "v":
                if len(tokens) < 4:
                    raise MeshFormatError(
                        "vertex needs 3 coordinates", path=path, line=lineno
                    )
                try:
                    vertices.append([float(t) for t in tokens[1:4]])
                except ValueError:
                    raise MeshFormatError(
                        f"bad vertex coordinate in {tokens[1:4]}", path=path, line=lineno
                    ) from None
            elif tag == "f":
                if len(tokens) < 4:
                    raise MeshFormatError(
                        "face needs at least 3 vertices", path=path, line=lineno
                    )
                idx = []
                for tok in tokens[1:]:
                    head = tok.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError:
                        raise MeshFormatError(
                            f"bad face index {tok!r}", path=path, line=lineno
                        ) from None
                    if i == 0:
                        raise MeshFormatError(
                            "OBJ face indices are 1-based; 0 is invalid",
                            path=path,
                            line=lineno,
                        )
                    idx.append(i - 1 if i > 0 else len(vertices) + i)
                for a, b in zip(idx[1:-1], idx[2:]):
                    triangles.append([idx[0], a, b])
            # Other tags (vn, vt, usemtl, o, g, s, mtllib...) are ignored.
    if not vertices:
        raise MeshFormatError("no vertices found", path=path, line=None)
    try:
        return TriMesh(np.array(vertices), np.array(triangles, dtype=np.int32).reshape(-1, 3))
    except Exception as exc:
        raise MeshFormatError(f"invalid mesh data: {exc}", path=path) from exc


_STL_HEADER = 80
_STL_RECORD = 50  # 12 floats (48 bytes) + uint16 attribute


def load_stl(path) -> TriMesh:
    """Read a binary STL file, welding exactly coincident vertices."""
    path = Path(path)
    data = Path(path).read_bytes()
    if len(data) < _STL_HEADER + 4:
        raise MeshFormatError(
            f"file too short for a binary STL ({len(data)} bytes)",
            path=path,
            offset=len(data),
        )
    if data[:5] == b"solid" and not _looks_binary_stl(data):
        raise MeshFormatError(
            "ASCII STL is not supported; export binary STL", path=path, offset=0
        )
    (count,) = struct.unpack_from("<I", data, _STL_HEADER)
    expected = _STL_HEADER + 4 + count * _STL_RECORD
    if len(data) < expected:
        raise MeshFormatError(
            f"truncated STL: header declares {count} triangles "
            f"({expected} bytes) but file has {len(data)}",
            path=path,
            offset=len(data),
        )
    raw = np.frombuffer(
        data, dtype=np.dtype("<f4"), count=count * 12, offset=_STL_HEADER + 4
    ).reshape(count, 12)
    # Record layout per triangle: normal (3), then 3 corners; the stored
    # normal is ignored and recomputed from winding where needed.
    # frombuffer cannot skip the 2-byte attribute, so re-read strided.
    tri = np.zeros((count, 3, 3), dtype=np.float64)
    rec = np.frombuffer(
        data,
        dtype=np.dtype(
            [("normal", "<f4", 3), ("corners", "<f4", (3, 3)), ("attr", "<u2")]
        ),
        count=count,
        offset=_STL_HEADER + 4,
    )
    tri[:] = rec["corners"]
    if not np.all(np.isfinite(tri)):
        bad = int(np.nonzero(~np.isfinite(tri).all(axis=(1, 2)))[0][0])
        raise MeshFormatError(
            f"non-finite coordinates in triangle {bad}",
            path=path,
            offset=_STL_HEADER + 4 + bad * _STL_RECORD,
        )
    flat = tri.reshape(-1, 3)
    verts, inverse = np.unique(flat, axis=0, return_inverse=True)
    faces = inverse.reshape(-1, 3).astype(np.int32)
    try:
        return TriMesh(verts, faces)
    except Exception as exc:
        raise MeshFormatError(f"invalid mesh data: {exc}", path=path) from exc


def _looks_binary_stl(data: bytes) -> bool:
    if len(data) < _STL_HEADER + 4:
        return False
    (count,) = struct.unpack_from("<I", data, _STL_HEADER)
    return len(data) == _STL_HEADER + 4 + count * _STL_RECORD


def save_stl(mesh: TriMesh, path) -> None:
    """Write a binary STL (fixture/export helper; colors are dropped)."""
    path = Path(path)
    tri = mesh.triangle_coords().astype("<f4")
    normals = mesh.triangle_normals().astype("<f4")
    rec = np.zeros(
        len(tri),
        dtype=np.dtype(
            [("normal", "<f4", 3), ("corners", "<f4", (3, 3)), ("attr", "<u2")]
        ),
    )
    rec["normal"] = normals
    rec["corners"] = tri
    with open(path, "wb") as fh:
        fh.write(b"\x00" * _STL_HEADER)
        fh.write(struct.pack("<I", len(tri)))
        fh.write(rec.tobytes())


_PLY_VERTEX_DTYPE = np.dtype(
    [
        ("x", "<f8"),
        ("y", "<f8"),
        ("z", "<f8"),
        ("red", "u1"),
        ("green", "u1"),
        ("blue", "u1"),
    ]
)
_PLY_FACE_DTYPE = np.dtype([("n", "u1"), ("i", "<i4", 3)])


def save_ply(mesh: TriMesh, path, default_color=(0.7, 0.7, 0.7)) -> None:
    """Write a binary little-endian PLY with double coordinates + uchar RGB."""
    path = Path(path)
    colors = mesh.colors
    if colors is None:
        colors = np.tile(np.asarray(default_color, dtype=np.float64), (mesh.n_vertices, 1))
    rgb = np.clip(np.rint(colors * 255.0), 0, 255).astype(np.uint8)
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {mesh.n_vertices}\n"
        "property double x\n"
        "property double y\n"
        "property double z\n"
        "property uchar red\n"
        "property uchar green\n"
        "property uchar blue\n"
        f"element face {mesh.n_triangles}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    vrec = np.zeros(mesh.n_vertices, dtype=_PLY_VERTEX_DTYPE)
    vrec["x"], vrec["y"], vrec["z"] = mesh.vertices.T
    vrec["red"], vrec["green"], vrec["blue"] = rgb.T
    frec = np.zeros(mesh.n_triangles, dtype=_PLY_FACE_DTYPE)
    frec["n"] = 3
    frec["i"] = mesh.triangles
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(vrec.tobytes())
        fh.write(frec.tobytes())


_PLY_TYPE_MAP = {
    "float": "<f4",
    "float32": "<f4",
    "double": "<f8",
    "float64": "<f8",
    "uchar": "u1",
    "uint8": "u1",
    "char": "i1",
    "int8": "i1",
    "short": "<i2",
    "ushort": "<u2",
    "int": "<i4",
    "int32": "<i4",
    "uint": "<u4",
    "uint32": "<u4",
}


def load_ply(path) -> TriMesh:
    """Read the binary little-endian PLY subset written by :func:`save_ply`."""
    path = Path(path)
    data = Path(path).read_bytes()
    end = data.find(b"end_header\n")
    if not data.startswith(b"ply\n") or end < 0:
        raise MeshFormatError("not a PLY file (missing header)", path=path, line=1)
    header_lines = data[:end].decode("ascii", errors="replace").splitlines()
    body_offset = end + len(b"end_header\n")

    elements: list[tuple[str, int, list[tuple[str, str]]]] = []
    fmt_seen = False
    for lineno, line in enumerate(header_lines[1:], start=2):
        tokens = line.split()
        if not tokens or tokens[0] == "comment":
            continue
        if tokens[0] == "format":
            if tokens[1] != "binary_little_endian":
                raise MeshFormatError(
                    f"unsupported PLY format {tokens[1]!r}", path=path, line=lineno
                )
            fmt_seen = True
        elif tokens[0] == "element":
            elements.append((tokens[1], int(tokens[2]), []))
        elif tokens[0] == "property":
            if not elements:
                raise MeshFormatError("property before element", path=path, line=lineno)
            if tokens[1] == "list":
                elements[-1][2].append(("list", f"{tokens[2]}:{tokens[3]}:{tokens[4]}"))
            else:
                elements[-1][2].append((tokens[2], tokens[1]))
    if not fmt_seen:
        raise MeshFormatError("missing format declaration", path=path, line=1)

    vertices = None
    colors = None
    faces = None
    offset = body_offset
    for name, count, props in elements:
        if name == "vertex":
            fields = []
            for pname, ptype in props:
                if pname == "list":
                    raise MeshFormatError(
                        "list property on vertex element unsupported",
                        path=path,
                        offset=offset,
                    )
                if ptype not in _PLY_TYPE_MAP:
                    raise MeshFormatError(
                        f"unsupported property type {ptype!r}", path=path, offset=offset
                    )
                fields.append((pname, _PLY_TYPE_MAP[ptype]))
            dt = np.dtype(fields)
            nbytes = dt.itemsize * count
            if len(data) < offset + nbytes:
                raise MeshFormatError(
                    "truncated vertex data", path=path, offset=len(data)
                )
            rec = np.frombuffer(data, dtype=dt, count=count, offset=offset)
            offset += nbytes
            try:
                vertices = np.stack(
                    [rec["x"], rec["y"], rec["z"]], axis=1
                ).astype(np.float64)
            except KeyError:
                raise MeshFormatError(
                    "vertex element lacks x/y/z", path=path, offset=offset
                ) from None
            if all(k in dt.names for k in ("red", "green", "blue")):
                colors = (
                    np.stack([rec["red"], rec["green"], rec["blue"]], axis=1).astype(
                        np.float64
                    )
                    / 255.0
                )
        elif name == "face":
            if len(props) != 1 or props[0][0] != "list":
                raise MeshFormatError(
                    "face element must hold a single vertex_indices list",
                    path=path,
                    offset=offset,
                )
            count_t, item_t, _ = props[0][1].split(":")
            cdt = np.dtype(_PLY_TYPE_MAP[count_t])
            idt = np.dtype(_PLY_TYPE_MAP[item_t])
            out = np.zeros((count, 3), dtype=np.int64)
            for i in range(count):
                if len(data) < offset + cdt.itemsize:
                    raise MeshFormatError(
                        "truncated face data", path=path, offset=len(data)
                    )
                n = int(np.frombuffer(data, dtype=cdt, count=1, offset=offset)[0])
                offset += cdt.itemsize
                if n != 3:
                    raise MeshFormatError(
                        f"face {i} has {n} vertices; only triangles supported",
                        path=path,
                        offset=offset,
                    )
                if len(data) < offset + 3 * idt.itemsize:
                    raise MeshFormatError(
                        "truncated face data", path=path, offset=len(data)
                    )
                out[i] = np.frombuffer(data, dtype=idt, count=3, offset=offset)
                offset += 3 * idt.itemsize
            faces = out
        else:
            raise MeshFormatError(
                f"unsupported element {name!r}", path=path, offset=offset
            )
    if vertices is None or faces is None:
        raise MeshFormatError("missing vertex or face element", path=path, offset=offset)
    try:
        return TriMesh(vertices, faces.astype(np.int32), colors)
    except Exception as exc:
        raise MeshFormatError(f"invalid mesh data: {exc}", path=path) from exc
