"""Minimal valid file bodies used as corpus plants.

Each body is the smallest well-formed file of its type that the
structural validators accept, frozen as bytes so corpus generation
is byte-stable across library versions.
"""

from .filescan import FileType


# 1x1 grayscale
PNG = bytes.fromhex(
    "89504e470d0a1a0a0000000d49484452000000010000000108000000003a7e9b"
    "550000000a49444154789c636000000002000148afa4710000000049454e44ae"
    "426082"
)

# 1x1 grayscale, low quality
JPEG = bytes.fromhex(
    "ffd8ffe000104a46494600010100000100010000ffdb00430050373c463c3250"
    "4641465a55505f78c882786e6e78f5afb991c8ffffffffffffffffffffffffff"
    "ffffffffffffffffffffffffffffffffffffffffffffffffffffc0000b080001"
    "000101011100ffc4001f00000105010101010101000000000000000001020304"
    "05060708090a0bffc400b5100002010303020403050504040000017d01020300"
    "041105122131410613516107227114328191a1082342b1c11552d1f024336272"
    "82090a161718191a25262728292a3435363738393a434445464748494a535455"
    "565758595a636465666768696a737475767778797a838485868788898a929394"
    "95969798999aa2a3a4a5a6a7a8a9aab2b3b4b5b6b7b8b9bac2c3c4c5c6c7c8c9"
    "cad2d3d4d5d6d7d8d9dae1e2e3e4e5e6e7e8e9eaf1f2f3f4f5f6f7f8f9faffda"
    "0008010100003f002bffd9"
)

# 1x1, two-color table
GIF = bytes.fromhex(
    "474946383761010001008000000000000000002c000000000100010000080400"
    "010404003b"
)

# one empty page, hand-written xref
PDF = bytes.fromhex(
    "255044462d312e340a312030206f626a0a3c3c2f54797065202f436174616c6f"
    "67202f50616765732032203020523e3e0a656e646f626a0a322030206f626a0a"
    "3c3c2f54797065202f5061676573202f4b696473205b33203020525d202f436f"
    "756e7420313e3e0a656e646f626a0a332030206f626a0a3c3c2f54797065202f"
    "50616765202f506172656e74203220302052202f4d65646961426f78205b3020"
    "30203920395d3e3e0a656e646f626a0a787265660a3020340a30303030303030"
    "3030302036353533352066200a30303030303030303039203030303030206e20"
    "0a30303030303030303536203030303030206e200a3030303030303031313120"
    "3030303030206e200a747261696c65720a3c3c2f53697a652034202f526f6f74"
    "2031203020523e3e0a7374617274787265660a3137360a2525454f460a"
)

# one stored member readme.txt
ZIP = bytes.fromhex(
    "504b03041400000000000000215020303a3606000000060000000a0000007265"
    "61646d652e74787468656c6c6f0a504b01021403140000000000000021502030"
    "3a3606000000060000000a000000000000000000000080010000000072656164"
    "6d652e747874504b05060000000001000100380000002e0000000000"
)

# empty archive, correct start-header CRC
SEVENZIP = bytes.fromhex(
    "377abcaf271c00048d9bd50f0000000000000000000000000000000000000000"
)

# 1x1 lossless
WEBP = bytes.fromhex(
    "524946461a000000574542505650384c0e0000002f00000000071011fd0f4444"
    "ff03"
)

# word package: zip holding word/document.xml
DOC = bytes.fromhex(
    "504b030414000000000000002150ee4758661d0000001d000000130000005b43"
    "6f6e74656e745f54797065735d2e786d6c3c3f786d6c2076657273696f6e3d22"
    "312e30223f3e3c54797065732f3e504b03041400000000000000215028e0c9e6"
    "220000002200000011000000776f72642f646f63756d656e742e786d6c3c3f78"
    "6d6c2076657273696f6e3d22312e30223f3e3c773a646f63756d656e742f3e50"
    "4b0102140314000000000000002150ee4758661d0000001d0000001300000000"
    "000000000000008001000000005b436f6e74656e745f54797065735d2e786d6c"
    "504b010214031400000000000000215028e0c9e6220000002200000011000000"
    "000000000000000080014e000000776f72642f646f63756d656e742e786d6c50"
    "4b05060000000002000200800000009f0000000000"
)

# empty ID3v2.3 tag plus one 48 kbps MPEG-1 layer III frame
MP3 = bytes.fromhex(
    "49443303000000000000fffb3000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "000000000000"
)

# ftyp(isom) box and a free box
MP4 = bytes.fromhex(
    "000000106674797069736f6d000000000000000866726565"
)

# ftyp(qt) box and a free box
MOV = bytes.fromhex(
    "000000106674797071742020000000000000000866726565"
)

# 44-byte PCM header, zero-length data chunk
WAV = bytes.fromhex(
    "524946462400000057415645666d74201000000001000100401f0000401f0000"
    "010008006461746100000000"
)

# LIST hdrl with an empty avih chunk
AVI = bytes.fromhex(
    "5249464650000000415649204c495354440000006864726c6176696838000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "000000000000000000000000000000000000000000000000"
)

# v4 signature plus main archive header with valid CRC
RAR = bytes.fromhex(
    "526172211a0700cf907300000d00000000000000"
)

# one empty ustar member and end-of-archive blocks
TAR = bytes.fromhex(
    "726561646d652e74787400000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000030303030363434003030303030303000303030303030300030303030"
    "3030303030303000303030303030303030303000303037373331002030000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0075737461720030300000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
    "0000000000000000000000000000000000000000000000000000000000000000"
)

BODIES = {
    FileType.PNG: PNG,
    FileType.JPEG: JPEG,
    FileType.GIF: GIF,
    FileType.PDF: PDF,
    FileType.ZIP: ZIP,
    FileType.SEVENZIP: SEVENZIP,
    FileType.WEBP: WEBP,
    FileType.DOC: DOC,
    FileType.MP3: MP3,
    FileType.MP4: MP4,
    FileType.MOV: MOV,
    FileType.WAV: WAV,
    FileType.AVI: AVI,
    FileType.RAR: RAR,
    FileType.TAR: TAR,
}
