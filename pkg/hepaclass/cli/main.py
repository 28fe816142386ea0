"""
 hepaclass command line.
"""
#  Copyright (c) 2026. Hepaclass contributors
#
#  Licensed under the Apache License, Version 2.0 (the "License");
#  you may not use this file except in compliance with the License.
#  You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
#  Unless required by applicable law or agreed to in writing, software
#  distributed under the License is distributed on an "AS IS" BASIS,
#  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#  See the License for the specific language governing permissions and
#  limitations under the License.
#

import argparse
import os
import sys
from typing import Optional, List, Dict, Any

from hepaclass.cli.config import RunConfig, config_flags
from hepaclass.data import (
    PatchConfig,
    PatchDataset,
    LABELS,
    load_volume,
    extract_lesions,
    extract_patch_triplet,
    prepare_dataset,
    load_prepared,
    PLANE_MODES,
)
from hepaclass.data.dataset import PATCH_ARCHIVE_FILE_NAME, LESIONS_FILE_NAME
from hepaclass.evaluation import evaluate, write_report, compare_models, predict_dataset
from hepaclass.evaluation.overlay import render_overlay, save_overlay, lesion_slices
from hepaclass.exceptions import HepaclassError, ConfigError
from hepaclass.logs import SemanticLogger, create_run_logger
from hepaclass.logs.models import LogLevel
from hepaclass.nn import build_model, load_checkpoint
from hepaclass.phantom import PhantomSpec, generate
from hepaclass.storage import LocalStorage
from hepaclass.storage.format import DictJsonSerializationFormat, DataFrameCsvSerializationFormat
from hepaclass.training import train, size_pretext_dataset

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

PREPARED_DIR = "prepared"
RUN_CONFIG_FILE_NAME = "config.json"
PREDICTIONS_FILE_NAME = "predictions.json"
OVERLAYS_DIR = "overlays"


def _parse_bool(value: str) -> bool:
    if value.lower() in ("true", "1", "yes"):
        return True
    if value.lower() in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true or false, got '{value}'")


def _add_config_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON run config, see README for the schema")
    group = parser.add_argument_group("config overrides")
    for flag in config_flags():
        group.add_argument(
            flag.flag,
            dest=flag.key,
            type=_parse_bool if flag.value_type is bool else flag.value_type,
            nargs=flag.nargs,
            default=argparse.SUPPRESS,
            help=f"overrides {flag.key}",
        )


def _add_workers_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--workers", type=int, help="data loader and inference threads (default: cores - 1)")


def build_parser() -> argparse.ArgumentParser:
    """
    Argument parser of all commands.
    """
    parser = argparse.ArgumentParser(prog="hepaclass", description="Liver lesion (cyst vs metastasis) classifier.")
    parser.add_argument(
        "--log-level", choices=[level.value for level in LogLevel], default=LogLevel.INFO.value, help="log level"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    gen_phantom = commands.add_parser("gen-phantom", help="generate a synthetic phantom dataset")
    gen_phantom.add_argument("--out", required=True, help="output dataset directory")
    gen_phantom.add_argument("--seed", type=int, default=0, help="phantom seed")
    gen_phantom.add_argument("--count", type=int, default=PhantomSpec.n_lesions, help="number of lesions")
    gen_phantom.add_argument(
        "--cyst-mean-ml", type=float, default=PhantomSpec.cyst_mean_ml, help="mean cyst volume in ml"
    )
    gen_phantom.add_argument(
        "--metastasis-mean-ml", type=float, default=PhantomSpec.metastasis_mean_ml, help="mean metastasis volume in ml"
    )

    prepare = commands.add_parser("prepare", help="extract patch triplets and split the dataset")
    prepare.add_argument("--data", required=True, help="dataset directory with manifest.csv")
    prepare.add_argument("--out", required=True, help="output directory")
    _add_config_arguments(prepare)

    train_command = commands.add_parser("train", help="train a classifier")
    train_command.add_argument("--data", required=True, help="prepared directory, or a dataset directory to prepare")
    train_command.add_argument("--out", required=True, help="output directory")
    train_command.add_argument(
        "--pretext", action="store_true", help="train the lesion size pretext task instead of lesion type"
    )
    _add_config_arguments(train_command)

    eval_command = commands.add_parser("eval", help="evaluate a checkpoint on the test split")
    eval_command.add_argument("--checkpoint", required=True, help="checkpoint file")
    eval_command.add_argument("--data", required=True, help="prepared directory")
    eval_command.add_argument("--out", required=True, help="output directory")
    _add_workers_argument(eval_command)

    predict = commands.add_parser("predict", help="classify the lesions of one volume and render overlays")
    predict.add_argument("--checkpoint", required=True, help="checkpoint file")
    predict.add_argument("--volume", required=True, help="volume <name>, <name>.json or <name>.raw")
    predict.add_argument("--mask", required=True, help="lesion mask in the same convention")
    predict.add_argument("--out", required=True, help="output directory")
    predict.add_argument("--plane-mode", choices=PLANE_MODES, default=PLANE_MODES[0], help="patch plane mode")
    _add_workers_argument(predict)

    compare = commands.add_parser("compare", help="evaluate several checkpoints side by side")
    compare.add_argument(
        "--checkpoint", required=True, action="append", metavar="NAME=PATH", help="named checkpoint, repeatable"
    )
    compare.add_argument("--data", required=True, help="prepared directory")
    compare.add_argument("--out", required=True, help="output directory")
    _add_workers_argument(compare)

    return parser


def resolve_run_config(args: argparse.Namespace) -> RunConfig:
    """
      Config file (or defaults) with command-line overrides applied.
    """
    run_config = RunConfig.from_file(args.config) if args.config else RunConfig()
    keys = {flag.key for flag in config_flags()}
    return run_config.with_overrides({key: value for key, value in vars(args).items() if key in keys})


def run_gen_phantom(args: argparse.Namespace, logger: SemanticLogger) -> None:
    """gen-phantom"""
    spec = PhantomSpec(
        n_lesions=args.count,
        seed=args.seed,
        cyst_mean_ml=args.cyst_mean_ml,
        metastasis_mean_ml=args.metastasis_mean_ml,
    )
    generate(spec, args.out, logger=logger)


def run_prepare(args: argparse.Namespace, logger: SemanticLogger) -> None:
    """prepare"""
    run_config = resolve_run_config(args)
    prepare_dataset(
        args.data,
        args.out,
        seed=run_config.seed,
        strategy=run_config.split_strategy,
        patch_config=run_config.patches,
        workers=run_config.workers,
        logger=logger,
    )


def run_train(args: argparse.Namespace, logger: SemanticLogger) -> None:
    """train"""
    run_config = resolve_run_config(args)
    prepared_dir = args.data
    if not os.path.exists(os.path.join(prepared_dir, PATCH_ARCHIVE_FILE_NAME)):
        prepared_dir = os.path.join(args.out, PREPARED_DIR)
        logger.info("{data} is not prepared, preparing into {prepared_dir}", data=args.data, prepared_dir=prepared_dir)
        prepare_dataset(
            args.data,
            prepared_dir,
            seed=run_config.seed,
            strategy=run_config.split_strategy,
            patch_config=run_config.patches,
            workers=run_config.workers,
            logger=logger,
        )

    dataset, split = load_prepared(prepared_dir)
    train_set, val_set = dataset.subset(split.train), dataset.subset(split.val)
    if args.pretext:
        lesions = LocalStorage().read_blob(
            os.path.join(prepared_dir, LESIONS_FILE_NAME), DataFrameCsvSerializationFormat
        )
        train_set = size_pretext_dataset(train_set, lesions)
        val_set = size_pretext_dataset(val_set, lesions)

    LocalStorage().save_data_as_blob(
        run_config.to_dict(), os.path.join(args.out, RUN_CONFIG_FILE_NAME), DictJsonSerializationFormat
    )
    model = build_model(run_config.model, rng_seed=run_config.seed, logger=logger)
    train(
        model,
        train_set,
        val_set,
        run_config.train_config(),
        out_dir=args.out,
        augmentation=run_config.augmentation,
        workers=run_config.workers,
        logger=logger,
    )


def run_eval(args: argparse.Namespace, logger: SemanticLogger) -> None:
    """eval"""
    dataset, split = load_prepared(args.data)
    report = evaluate(load_checkpoint(args.checkpoint), dataset.subset(split.test), workers=args.workers, logger=logger)
    write_report(report, args.out)


def run_predict(args: argparse.Namespace, logger: SemanticLogger) -> None:
    """predict"""
    model = load_checkpoint(args.checkpoint)
    vm = load_volume(args.volume, args.mask)
    patch_config = PatchConfig(target_size=model.metadata.patch_target, plane_mode=args.plane_mode)
    triplets = [extract_patch_triplet(vm, record, patch_config) for record in extract_lesions(vm)]
    prediction = predict_dataset(model, PatchDataset.from_triplets(triplets), batch_size=1, workers=args.workers)

    results: Dict[str, Any] = {
        lesion_id: {**dict(zip(LABELS, probabilities)), "predicted": LABELS[predicted]}
        for lesion_id, probabilities, predicted in zip(
            prediction.lesion_ids, prediction.probabilities.tolist(), prediction.predicted.tolist()
        )
    }
    LocalStorage().save_data_as_blob(
        results, os.path.join(args.out, PREDICTIONS_FILE_NAME), DictJsonSerializationFormat
    )

    classes = {lesion_id: result["predicted"] for lesion_id, result in results.items()}
    for slice_index in lesion_slices(vm):
        save_overlay(
            render_overlay(vm, classes, slice_index),
            os.path.join(args.out, OVERLAYS_DIR, f"{vm.name}_z{slice_index:04d}.ppm"),
        )

    logger.info("Classified {lesions} lesions of {volume}", lesions=len(results), volume=vm.name)


def run_compare(args: argparse.Namespace, logger: SemanticLogger) -> None:
    """compare"""
    checkpoints = {}
    for value in args.checkpoint:
        name, separator, path = value.partition("=")
        if not separator or not name or not path:
            raise ConfigError(f"--checkpoint expects NAME=PATH, got '{value}'")
        checkpoints[name] = path

    dataset, split = load_prepared(args.data)
    comparison = compare_models(
        checkpoints, dataset.subset(split.test), out_dir=args.out, workers=args.workers, logger=logger
    )
    logger.info("Compared models:\n{table}", table=comparison.to_string(index=False))


COMMANDS = {
    "gen-phantom": run_gen_phantom,
    "prepare": run_prepare,
    "train": run_train,
    "eval": run_eval,
    "predict": run_predict,
    "compare": run_compare,
}


def main(argv: Optional[List[str]] = None) -> int:
    """
      Runs one command.

    :param argv: Arguments without the program name, `sys.argv[1:]` if not provided.
    :return: 0 on success, 1 on runtime failures, 2 on usage and configuration errors.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_request:
        return int(exit_request.code or EXIT_OK)

    logger = create_run_logger(min_log_level=LogLevel(args.log_level), fixed_fields={"command": args.command})
    try:
        COMMANDS[args.command](args, logger)
    except ConfigError as error:
        parser.print_usage(sys.stderr)
        logger.error("Invalid configuration: {error}", error=str(error))
        return EXIT_USAGE
    except (HepaclassError, OSError) as error:
        logger.error("Run failed: {error}", error=str(error), exception=error)
        return EXIT_RUNTIME

    return EXIT_OK
