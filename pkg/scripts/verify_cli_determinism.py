import subprocess
import os
import sys
import json
import shutil
import tempfile
import logging

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))


def run_main(args):
    """以子程序執行 main.py，返回 (結束碼, stdout bytes)"""
    process = subprocess.run(
        [sys.executable, 'main.py'] + args,
        cwd=PROJECT_ROOT,
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )
    return process.returncode, process.stdout


def check_repeatable(label, args, runs=2):
    outputs = [run_main(args) for _ in range(runs)]
    if len({out for out in outputs}) != 1:
        logger.error(f"❌ {label}: 重複執行輸出不同")
        return False
    code, out = outputs[0]
    if code != 0:
        logger.error(f"❌ {label}: 結束碼 {code}")
        return False
    logger.info(f"✅ {label}: {len(out)} bytes，{runs} 次輸出相同")
    return True


def check_gen(workdir):
    dirs = [os.path.join(workdir, f'gen_{i}') for i in range(2)]
    for target in dirs:
        code, _ = run_main(['gen', '--dim', '2', '--max-coord', '3', '--count', '10',
                            '--seed', '42', '--out', target])
        if code != 0:
            logger.error(f"❌ gen: 結束碼 {code}")
            return False
    names = sorted(os.listdir(dirs[0]))
    for name in names:
        with open(os.path.join(dirs[0], name), 'rb') as a, open(os.path.join(dirs[1], name), 'rb') as b:
            if a.read() != b.read():
                logger.error(f"❌ gen: {name} 兩次內容不同")
                return False
    logger.info(f"✅ gen: {len(names)} 個檔案逐位元組相同")
    return True


if __name__ == "__main__":
    workdir = tempfile.mkdtemp()
    try:
        square = os.path.join(workdir, 'square.json')
        with open(square, 'w', encoding='utf-8') as f:
            json.dump({'name': 'square', 'vertices': [[0, 0], [2, 0], [0, 2], [2, 2]]}, f)
        pair = os.path.join(workdir, 'pair.json')
        with open(pair, 'w', encoding='utf-8') as f:
            json.dump({'P': {'name': 'P', 'vertices': [[0, 0], [3, 0], [0, 3]]},
                       'Q': {'name': 'Q', 'vertices': [[0, 0], [1, 1]]}}, f)

        success = all([
            check_repeatable('delta --method all', ['delta', square, '--method', 'all', '--seed', '5']),
            check_repeatable('hvector', ['hvector', square, '--seed', '5']),
            check_repeatable('decompose', ['decompose', square, '--seed', '5']),
            check_repeatable('orbifold', ['orbifold', square, '--seed', '5', '--upto', '4']),
            check_repeatable('monotone', ['monotone', pair, '--seed', '5']),
            check_gen(workdir),
        ])
    finally:
        shutil.rmtree(workdir)

    if success:
        logger.info("🎉 All determinism checks passed!")
        sys.exit(0)
    else:
        logger.error("❌ Determinism checks failed")
        sys.exit(1)
