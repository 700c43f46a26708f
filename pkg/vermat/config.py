import os
from dotenv import load_dotenv

load_dotenv()

class Config:
    BACKEND = os.getenv('VERMAT_BACKEND', 'real')
    TOY_MODULUS = int(os.getenv('VERMAT_TOY_MODULUS', '101'))
    SEED = os.getenv('VERMAT_SEED')
    LOG_LEVEL = os.getenv('VERMAT_LOG_LEVEL', 'WARNING')
    VERIFY_MODE = os.getenv('VERMAT_VERIFY_MODE', 'production')
    WORKERS = int(os.getenv('VERMAT_WORKERS', '1'))
    DIM_RATIO = int(os.getenv('VERMAT_DIM_RATIO', '100'))
    CHUNK_A = float(os.getenv('VERMAT_CHUNK_A', '0.75'))

    FS_DOMAIN = b"vermat/fs/v1"
    CONTAINER_MAGIC = b"VMAT1"

    @property
    def DEFAULT_SEED(self):
        """Seed as an int, or None when keys must come from the OS CSPRNG"""
        return int(self.SEED) if self.SEED not in (None, '') else None

    @property
    def TESTING_MODE(self):
        return self.VERIFY_MODE.lower() == 'testing'

config = Config()
