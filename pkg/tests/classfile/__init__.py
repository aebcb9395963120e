import struct

INIT_CODE = bytes.fromhex("2ab70001b1")  # aload_0; invokespecial #1; return
RETURN_CODE = bytes.fromhex("b1")


def class_bytes(
    name: str,
    methods: list[tuple[str, str, bytes | None]],
    *,
    major: int = 52,
    with_long_constant: bool = False,
) -> bytes:
    """A minimal class file; a ``None`` code makes the method abstract."""
    pool: list[bytes] = []
    indices: dict[str, int] = {}

    def utf8(text: str) -> int:
        if text not in indices:
            encoded = text.encode()
            pool.append(struct.pack(">BH", 1, len(encoded)) + encoded)
            indices[text] = len(pool)
        return indices[text]

    def class_ref(text: str) -> int:
        target = utf8(text)
        pool.append(struct.pack(">BH", 7, target))
        return len(pool)

    this_class = class_ref(name.replace(".", "/"))
    super_class = class_ref("java/lang/Object")
    code_name = utf8("Code")
    if with_long_constant:
        pool.append(struct.pack(">Bq", 5, 1 << 40))
        pool.append(b"")  # a long takes two slots

    body = b""
    for method, descriptor, code in methods:
        attributes = b""
        count = 0
        if code is not None:
            info = struct.pack(">HHI", 2, 2, len(code)) + code
            info += struct.pack(">HH", 0, 0)
            attributes = struct.pack(">HI", code_name, len(info)) + info
            count = 1
        body += struct.pack(
            ">HHHH", 0x0001, utf8(method), utf8(descriptor), count
        )
        body += attributes
    slots = len(pool)

    return (
        struct.pack(">IHHH", 0xCAFEBABE, 0, major, slots + 1)
        + b"".join(pool)
        + struct.pack(">HHHH", 0x0021, this_class, super_class, 0)
        + struct.pack(">H", 0)  # fields
        + struct.pack(">H", len(methods))
        + body
        + struct.pack(">H", 0)  # attributes
    )
