"""
Command-line interface: one subcommand per role plus the benchmark harness.

Exit codes: 0 accepted, 1 rejected, 2 malformed input, 3 illegal parameters.
"""
import argparse
import logging
import random
import sys
from pathlib import Path
from typing import List, Optional

from vermat import __version__
from vermat.bench_service import DEFAULT_DATA_MODULUS, bench_service
from vermat.config import config
from vermat.container_service import container_service
from vermat.errors import GroupMismatchError, MalformedError, ParameterError, VermatError
from vermat.fplinalg import load_integers, load_matrix_market
from vermat.pairing_core import PairingSuite, suite_for
from vermat.protocol_contract import ProtocolContract
from vermat.protocol_service import get_protocol
from vermat.schemas import ContainerHeader, RoleTag

logger = logging.getLogger(__name__)

EXIT_ACCEPT = 0
EXIT_REJECT = 1
EXIT_MALFORMED = 2


def _int_list(text: str) -> List[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _rng(seed: Optional[int]) -> Optional[random.Random]:
    if seed is None:
        return None
    logger.warning(f"using seed {seed}: keys and challenges are reproducible and not secret")
    return random.Random(seed)


def _suite(backend: str, modulus: Optional[int]) -> PairingSuite:
    if backend == "toy" and modulus is None:
        modulus = config.TOY_MODULUS
    return suite_for(backend, modulus)


def _bundle_for(header: ContainerHeader):
    return get_protocol(header.protocol.value).bundle_type(header.role)


def _load(path: Path, role: Optional[RoleTag], protocol=None):
    header, suite, bundle = container_service.load(path, _bundle_for, protocol, role)
    return header, suite, bundle, get_protocol(header.protocol.value)


def _same_suite(expected: PairingSuite, other: PairingSuite, path: Path) -> None:
    if other != expected:
        raise MalformedError(f"{path} was made for {other!r}, expected {expected!r}")


# ==================================================
#              COMMANDS
# ==================================================

def cmd_keygen(args) -> int:
    adapter = get_protocol(args.protocol)
    suite = _suite(args.backend, args.modulus)
    matrix, length = None, args.length
    if adapter.needs_matrix:
        if args.matrix is None:
            raise ParameterError(f"{adapter.tag.value} keygen needs --matrix")
        p = args.data_modulus if adapter.small_field else suite.p
        matrix = load_matrix_market(args.matrix, p)
        logger.info(f"loaded {matrix.m}x{matrix.n} matrix with {matrix.nnz} nonzeros from {args.matrix}")
    elif length is None:
        raise ParameterError(f"{adapter.tag.value} keygen needs --length")

    request = ProtocolContract.KeygenRequestDTO(
        suite=suite,
        matrix=matrix,
        length=length,
        rng=_rng(args.seed),
        dims={name: getattr(args, name) for name in ("b1", "b2", "c1", "c2", "d1", "d2")},
        chunk_a=args.chunk_a,
        fiat_shamir=args.fiat_shamir,
    )
    keys = adapter.keygen(request)

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for role, bundle in ((RoleTag.EK, keys.ek), (RoleTag.VK, keys.vk), (RoleTag.TRUSTEE, keys.trustee)):
        if bundle is not None:
            container_service.save(out_dir / f"{role.value}.bin", bundle, adapter.tag, role, suite,
                                   keys.dims, keys.meta)
    return EXIT_ACCEPT


def cmd_probgen(args) -> int:
    header, suite, key, adapter = _load(Path(args.key), None)
    x = load_integers(args.x)
    sigma = adapter.probgen(key, x, suite)
    container_service.save(args.out, sigma, adapter.tag, RoleTag.PROBGEN, suite, header.dims)
    return EXIT_ACCEPT


def cmd_compute(args) -> int:
    header, suite, ek, adapter = _load(Path(args.ek), RoleTag.EK)
    x = load_integers(args.x)
    proof = adapter.compute(ek, x, suite)
    container_service.save(args.out, proof, adapter.tag, RoleTag.PROOF, suite, header.dims)
    return EXIT_ACCEPT


def cmd_trustee(args) -> int:
    header, suite, key, adapter = _load(Path(args.trustee), RoleTag.TRUSTEE)
    _, proof_suite, proof, _ = _load(Path(args.proof), RoleTag.PROOF, adapter.tag)
    _same_suite(suite, proof_suite, Path(args.proof))
    x = load_integers(args.x)
    response = adapter.trustee(key, x, proof, suite)
    container_service.save(args.out, response, adapter.tag, RoleTag.RESPONSE, suite, header.dims)
    return EXIT_ACCEPT


def cmd_verify(args) -> int:
    _, suite, vk, adapter = _load(Path(args.vk), RoleTag.VK)
    _, proof_suite, proof, _ = _load(Path(args.proof), RoleTag.PROOF, adapter.tag)
    _same_suite(suite, proof_suite, Path(args.proof))
    aux = None
    for path, role in ((args.probgen, RoleTag.PROBGEN), (args.response, RoleTag.RESPONSE)):
        if path is not None:
            _, aux_suite, aux, _ = _load(Path(path), role, adapter.tag)
            _same_suite(suite, aux_suite, Path(path))
    x = load_integers(args.x)

    try:
        verdict = adapter.verify(vk, x, proof, suite, aux, _rng(args.seed))
    except GroupMismatchError as e:
        logger.warning(f"{adapter.tag.value} proof holds an element of the wrong group: {e.detail}")
        print("rejected: group", file=sys.stderr)
        return EXIT_REJECT
    if not verdict.accepted:
        logger.warning(f"{adapter.tag.value} proof rejected ({verdict.reason})")
        print(f"rejected: {verdict.reason}", file=sys.stderr)
        return EXIT_REJECT
    if verdict.y is not None:
        sys.stdout.write("".join(f"{v}\n" for v in verdict.y))
    else:
        print(verdict.value.to_bytes().hex())
    return EXIT_ACCEPT


def cmd_bench(args) -> int:
    modulus = args.modulus
    if modulus is None and args.backend == "toy":
        modulus = config.TOY_MODULUS
    report = bench_service.run(
        protocols=[p.strip() for p in args.protocols.split(",") if p.strip()],
        sizes=args.sizes,
        repetitions=args.repetitions,
        seed=args.seed if args.seed is not None else 0,
        backend=args.backend,
        modulus=modulus,
        nnz_per_row=args.nnz_per_row,
        data_modulus=args.data_modulus,
        parallel=args.parallel,
    )
    csv = report.to_csv()
    if args.out:
        Path(args.out).write_text(csv)
        logger.info(f"wrote {len(report.rows)} bench rows to {args.out}")
    else:
        sys.stdout.write(csv)
    return EXIT_ACCEPT


# ==================================================
#              PARSER
# ==================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vermat", description="Verifiable outsourced matrix-vector products")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def suite_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--backend", choices=("real", "toy"), default=config.BACKEND)
        p.add_argument("--modulus", type=int, default=None, help="group order of the toy backend")
        p.add_argument("--seed", type=int, default=config.DEFAULT_SEED)

    keygen = sub.add_parser("keygen", help="preparator: write ek, vk and trustee containers")
    keygen.add_argument("--protocol", required=True)
    keygen.add_argument("--matrix", help="Matrix Market file")
    keygen.add_argument("--length", type=int, help="vector length for rank1dp/gendp")
    keygen.add_argument("--out-dir", required=True)
    suite_flags(keygen)
    for name in ("b1", "b2", "c1", "c2", "d1", "d2"):
        keygen.add_argument(f"--{name}", type=int, default=None)
    keygen.add_argument("--chunk-a", type=float, default=None, help="chunk size exponent for gendp")
    keygen.add_argument("--data-modulus", type=int, default=DEFAULT_DATA_MODULUS,
                        help="small data field for smallfield")
    keygen.add_argument("--fiat-shamir", action="store_true", help="freivalds challenge from a transcript")
    keygen.set_defaults(handler=cmd_keygen)

    probgen = sub.add_parser("probgen", help="trustee: per-input verification material (fg, pvmat)")
    probgen.add_argument("--key", required=True, help="trustee.bin for fg, ek.bin or vk.bin for pvmat")
    probgen.add_argument("--x", required=True)
    probgen.add_argument("--out", required=True)
    probgen.set_defaults(handler=cmd_probgen)

    compute = sub.add_parser("compute", help="prover: output and proof")
    compute.add_argument("--ek", required=True)
    compute.add_argument("--x", required=True)
    compute.add_argument("--out", required=True)
    compute.set_defaults(handler=cmd_compute)

    trustee = sub.add_parser("trustee", help="trustee: response to a proof (spmv, smallfield)")
    trustee.add_argument("--trustee", required=True)
    trustee.add_argument("--x", required=True)
    trustee.add_argument("--proof", required=True)
    trustee.add_argument("--out", required=True)
    trustee.set_defaults(handler=cmd_trustee)

    verify = sub.add_parser("verify", help="verifier: print the output or exit 1")
    verify.add_argument("--vk", required=True)
    verify.add_argument("--x", required=True)
    verify.add_argument("--proof", required=True)
    verify.add_argument("--probgen")
    verify.add_argument("--response")
    verify.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    verify.set_defaults(handler=cmd_verify)

    bench = sub.add_parser("bench", help="time every phase and write CSV")
    bench.add_argument("--protocols", default="freivalds,fg,spmv,pvmat")
    bench.add_argument("--sizes", type=_int_list, default=[64, 128])
    bench.add_argument("--repetitions", type=int, default=1)
    suite_flags(bench)
    bench.add_argument("--nnz-per-row", type=int, default=None)
    bench.add_argument("--data-modulus", type=int, default=DEFAULT_DATA_MODULUS)
    bench.add_argument("--parallel", type=int, default=0)
    bench.add_argument("--out")
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else config.LOG_LEVEL.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except GroupMismatchError as e:
        logger.error(f"{args.command} failed: {e.detail}")
        print(f"error: {e.detail}", file=sys.stderr)
        return EXIT_MALFORMED
    except VermatError as e:
        logger.error(f"{args.command} failed: {e.detail}")
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.exception(f"{args.command} failed unexpectedly: {e}")
        return EXIT_MALFORMED


if __name__ == "__main__":
    sys.exit(main())
