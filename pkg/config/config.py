import os

from dotenv import load_dotenv
from sympy import isprime

load_dotenv()


class ConfigError(Exception):
    """Invalid configuration value."""
    pass


class Config:
    """Base configuration class for the verification workbench."""
    DEBUG = False
    TESTING = False

    # Modular backend
    PRIME = int(os.environ.get('WORKBENCH_PRIME', 2305843009213693951))
    SEED = int(os.environ.get('WORKBENCH_SEED', 0))
    TRIALS = int(os.environ.get('WORKBENCH_TRIALS', 20))
    RESAMPLE_LIMIT = int(os.environ.get('WORKBENCH_RESAMPLE_LIMIT', 32))

    # Execution
    JOBS = int(os.environ.get('WORKBENCH_JOBS', 1))
    DEGREE_CAP = int(os.environ.get('WORKBENCH_DEGREE_CAP', 4))

    # Output
    LOG_LEVEL = os.environ.get('WORKBENCH_LOG_LEVEL', 'INFO')
    REPORT_DIR = os.environ.get('WORKBENCH_REPORT_DIR') or \
        os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'reports')

    @classmethod
    def validate(cls):
        if cls.PRIME <= 2 ** 31 or not isprime(cls.PRIME):
            raise ConfigError(f"WORKBENCH_PRIME={cls.PRIME} must be a prime above 2^31")
        if cls.JOBS < 1:
            raise ConfigError(f"WORKBENCH_JOBS={cls.JOBS} must be at least 1")
        if cls.RESAMPLE_LIMIT < 1:
            raise ConfigError(f"WORKBENCH_RESAMPLE_LIMIT={cls.RESAMPLE_LIMIT} must be at least 1")


class DevelopmentConfig(Config):
    """Development environment configuration."""
    DEBUG = True
    LOG_LEVEL = os.environ.get('WORKBENCH_LOG_LEVEL', 'DEBUG')


class TestingConfig(Config):
    """Testing environment configuration."""
    DEBUG = True
    TESTING = True
    SEED = 0
    TRIALS = 5
    JOBS = 1


class ProductionConfig(Config):
    """Production environment configuration."""
    DEBUG = False
    TESTING = False


# Configuration dictionary for easy access
config = {
    'development': DevelopmentConfig,
    'testing': TestingConfig,
    'production': ProductionConfig,
    'default': DevelopmentConfig
}
